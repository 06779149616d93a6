//! Angle conventions.
//!
//! Reported phases live in `[0, 2π)`; incremental tracking uses the principal
//! branch `(-π, π]`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use crate::error::{PhaseError, Result};

/// Values this close below 2π are reported as 0.
const WRAP_SNAP: f64 = 1e-12;

/// Maps an angle into `[0, 2π)`.
pub fn wrap_2pi(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if TAU - r < WRAP_SNAP {
        0.0
    } else {
        r
    }
}

/// Maps an angle into `(-π, π]`.
pub fn wrap_pi(x: f64) -> f64 {
    let r = wrap_2pi(x);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// `arg z` in `[0, 2π)`.
pub fn arg_2pi(z: Complex64) -> f64 {
    wrap_2pi(z.arg())
}

/// Shortest distance between two angles on the circle.
pub fn circular_distance(a: f64, b: f64) -> f64 {
    wrap_pi(a - b).abs()
}

/// `|e^{ia} - e^{ib}|`.
pub fn phase_factor_distance(a: f64, b: f64) -> f64 {
    (Complex64::from_polar(1.0, a) - Complex64::from_polar(1.0, b)).norm()
}

/// Largest principal increment accepted between neighbouring samples.
pub const MAX_STEP_INCREMENT: f64 = PI / 2.0;

/// Continuous phase of a sequence of complex overlaps.
///
/// Starts from the principal argument of the first sample and adds principal
/// increments `arg(z_{k+1} conj(z_k))`. Fails when a sample falls below
/// `overlap_tol` or an increment exceeds [`MAX_STEP_INCREMENT`].
pub fn unwrap_phases(samples: &[Complex64], overlap_tol: f64) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(samples.len());
    let mut prev: Option<Complex64> = None;
    let mut acc = 0.0;
    for (k, &z) in samples.iter().enumerate() {
        let modulus = z.norm();
        if !modulus.is_finite() {
            return Err(PhaseError::NonFinite(format!("overlap sample {k}")));
        }
        if modulus < overlap_tol {
            return Err(PhaseError::UndefinedPhase {
                modulus,
                tol: overlap_tol,
                context: format!("overlap at grid index {k}"),
            });
        }
        match prev {
            None => acc = z.arg(),
            Some(p) => {
                let inc = (z * p.conj()).arg();
                if inc.abs() > MAX_STEP_INCREMENT {
                    return Err(PhaseError::StepTooCoarse {
                        step: k,
                        increment: inc,
                    });
                }
                acc += inc;
            }
        }
        out.push(acc);
        prev = Some(z);
    }
    Ok(out)
}

/// Cumulative trapezoid integral of uniformly spaced samples, starting at 0.
pub fn cumulative_trapezoid(values: &[f64], dt: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    for (k, v) in values.iter().enumerate() {
        if k > 0 {
            acc += 0.5 * dt * (values[k - 1] + v);
        }
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrap_ranges() {
        assert_eq!(wrap_2pi(0.0), 0.0);
        assert!((wrap_2pi(-0.5) - (TAU - 0.5)).abs() < 1e-15);
        assert_eq!(wrap_2pi(TAU), 0.0);
        assert_eq!(wrap_2pi(-1e-16), 0.0);
        assert!((wrap_pi(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-15);
        assert_eq!(wrap_pi(PI), PI);
    }

    #[test]
    fn unwrap_follows_full_turns() {
        let samples: Vec<_> = (0..=400)
            .map(|k| Complex64::from_polar(1.0, -3.0 * TAU * k as f64 / 400.0))
            .collect();
        let phases = unwrap_phases(&samples, 1e-10).unwrap();
        assert!((phases[400] + 3.0 * TAU).abs() < 1e-9);
    }

    #[test]
    fn unwrap_rejects_coarse_steps() {
        let samples = [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.1)];
        assert!(matches!(
            unwrap_phases(&samples, 1e-10),
            Err(PhaseError::StepTooCoarse { step: 1, .. })
        ));
    }

    #[test]
    fn unwrap_rejects_nodes() {
        let samples = [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)];
        assert!(matches!(
            unwrap_phases(&samples, 1e-10),
            Err(PhaseError::UndefinedPhase { .. })
        ));
    }

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let dt = 0.01;
        let v: Vec<f64> = (0..=100).map(|k| 2.0 * k as f64 * dt).collect();
        let c = cumulative_trapezoid(&v, dt);
        assert!((c[100] - 1.0).abs() < 1e-12);
    }
}
