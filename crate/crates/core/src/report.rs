//! Deterministic JSON and CSV output.
//!
//! Every float is rounded to 12 significant digits and object keys are
//! sorted, so repeated runs produce byte-identical files. Non-finite values
//! are refused with the offending field named.

use std::collections::BTreeMap;

use serde_json::Value;

use crate::error::{PhaseError, Result};
use crate::phases::PhaseReport;

pub const SIGNIFICANT_DIGITS: usize = 12;

/// Rounds to [`SIGNIFICANT_DIGITS`] significant digits; `-0` becomes `0`.
pub fn round_significant(x: f64) -> f64 {
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        0.0
    } else {
        rounded
    }
}

fn finite(key: &str, x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(round_significant(x))
    } else {
        Err(PhaseError::NonFinite(format!("report field '{key}'")))
    }
}

/// Flat JSON object with sorted keys.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    fields: BTreeMap<String, Value>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num(&mut self, key: &str, x: f64) -> Result<()> {
        let v = finite(key, x)?;
        self.fields.insert(key.into(), Value::from(v));
        Ok(())
    }

    pub fn opt_num(&mut self, key: &str, x: Option<f64>) -> Result<()> {
        match x {
            Some(x) => self.num(key, x),
            None => {
                self.fields.insert(key.into(), Value::Null);
                Ok(())
            }
        }
    }

    pub fn nums(&mut self, key: &str, xs: &[f64]) -> Result<()> {
        let values = xs
            .iter()
            .map(|x| finite(key, *x).map(Value::from))
            .collect::<Result<Vec<_>>>()?;
        self.fields.insert(key.into(), Value::Array(values));
        Ok(())
    }

    pub fn int(&mut self, key: &str, n: i64) {
        self.fields.insert(key.into(), Value::from(n));
    }

    pub fn ints(&mut self, key: &str, ns: &[i64]) {
        self.fields.insert(key.into(), Value::from(ns.to_vec()));
    }

    pub fn flag(&mut self, key: &str, b: bool) {
        self.fields.insert(key.into(), Value::Bool(b));
    }

    pub fn text(&mut self, key: &str, s: &str) {
        self.fields.insert(key.into(), Value::String(s.into()));
    }

    pub fn get(&self, key: &str) -> Option<&Value> {
        self.fields.get(key)
    }

    pub fn to_value(&self) -> Value {
        Value::Object(self.fields.clone().into_iter().collect())
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_value()).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Numeric table written as CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    header: Vec<String>,
    rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) -> Result<()> {
        if row.len() != self.header.len() {
            return Err(PhaseError::Dimension(format!(
                "table row has {} cells for {} columns",
                row.len(),
                self.header.len()
            )));
        }
        let row = row
            .into_iter()
            .zip(&self.header)
            .map(|(x, h)| finite(h, x))
            .collect::<Result<Vec<_>>>()?;
        self.rows.push(row);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// Flattens a [`PhaseReport`]; per-component lists are ordered by Schmidt index.
pub fn phase_report(r: &PhaseReport) -> Result<Report> {
    let mut out = Report::new();
    out.num("alpha", r.alpha)?;
    out.opt_num("alpha_unwrapped", r.alpha_unwrapped)?;
    out.num("beta", r.beta)?;
    out.num("gamma", r.gamma)?;
    out.flag("cyclic", r.cyclic);
    out.num("cyclic_residual", r.cyclic_residual)?;
    let col = |f: fn(&crate::phases::ComponentPhases) -> f64| -> Vec<f64> { r.components.iter().map(f).collect() };
    out.nums("p", &col(|c| c.weight))?;
    out.nums("arg_a", &col(|c| c.arg_a))?;
    out.nums("arg_b", &col(|c| c.arg_b))?;
    out.nums("gamma_a", &col(|c| c.gamma_a))?;
    out.nums("gamma_b", &col(|c| c.gamma_b))?;
    out.nums("beta_a", &col(|c| c.beta_a))?;
    out.nums("beta_b", &col(|c| c.beta_b))?;
    match r.components.iter().map(|c| c.n_tilde).collect::<Option<Vec<_>>>() {
        Some(v) if !v.is_empty() => out.ints("n_tilde", &v),
        _ => {
            out.fields.insert("n_tilde".into(), Value::Null);
        }
    }
    match r.components.iter().map(|c| c.winding_raw).collect::<Option<Vec<_>>>() {
        Some(v) if !v.is_empty() => out.nums("n_raw", &v)?,
        _ => {
            out.fields.insert("n_raw".into(), Value::Null);
        }
    }
    match r.windings() {
        Some(v) if !v.is_empty() => out.ints("n", &v),
        _ => {
            out.fields.insert("n".into(), Value::Null);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rounding_keeps_twelve_digits() {
        assert_eq!(round_significant(1.0 / 7.0), 0.142857142857);
        assert_eq!(round_significant(-1e-300 * 1e-300), 0.0);
        assert_eq!(round_significant(0.1 + 0.2), 0.3);
        assert_eq!(round_significant(123456.7890123456), 123456.789012);
    }

    #[test]
    fn keys_are_sorted_and_nan_refused() {
        let mut r = Report::new();
        r.num("zeta", 1.0).unwrap();
        r.num("alpha", 2.0).unwrap();
        r.flag("mid", true);
        let json = r.to_json();
        assert!(json.find("alpha").unwrap() < json.find("mid").unwrap());
        assert!(json.find("mid").unwrap() < json.find("zeta").unwrap());
        assert!(matches!(r.num("bad", f64::NAN), Err(PhaseError::NonFinite(_))));
        assert!(r.nums("bad", &[1.0, f64::INFINITY]).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut t = Table::new(&["chi", "intensity"]);
        t.push(vec![0.0, 4.0]).unwrap();
        t.push(vec![0.5, 1.0 / 3.0]).unwrap();
        assert!(t.push(vec![1.0]).is_err());
        assert_eq!(t.to_csv(), "chi,intensity\n0,4\n0.5,0.333333333333\n");
    }
}
