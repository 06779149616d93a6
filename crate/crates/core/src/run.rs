//! Executes the tasks of a validated [`Scenario`] and writes their reports.
//!
//! Each task writes `<out>/<stem>.json` and, for sweeps, `<out>/<stem>.csv`.
//! A failing task writes `<out>/error.json` with the task name, an error
//! code and a message; files of tasks that completed earlier are kept.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde_json::json;
use thiserror::Error;

use crate::angle::circular_distance;
use crate::error::{PhaseError, Result};
use crate::evolution::UnitaryPath;
use crate::gauge::{
    apply_s1, apply_s2, make_parallel_transporting, make_pure_parallel_transporting, pt_residuals,
    s2_predicted_entangled_phase, GaugeFunction,
};
use crate::interferometry::{analytic_fringe, sweep_and_fit, Noise, SweepOptions, DEFAULT_VISIBILITY_FLOOR};
use crate::mixedstate::{
    compare_phases, compare_phases_in_basis, entangled_phase_one_sided, mixed_geometric_phase,
    mixed_total_phase,
};
use crate::phases::{cyclic_decomposition, geometric_phase_entangled};
use crate::report::{phase_report, Report, Table};
use crate::scenario::{GaugeFamily, GaugePreset, Scenario, ScenarioError, TaskDoc, TransportKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    #[error("task '{task}' failed: {error}")]
    Task { task: String, error: PhaseError },
    #[error("cannot access {}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Scenario(_) => EXIT_VALIDATION,
            RunError::Task { error, .. } if error.is_numerical() => EXIT_NUMERICAL,
            RunError::Task { .. } => EXIT_VALIDATION,
            RunError::Io { .. } => EXIT_IO,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            RunError::Scenario(e) => e.code(),
            RunError::Task { error, .. } => error.code(),
            RunError::Io { .. } => "io",
        }
    }

    /// Machine-readable `{task, code, message}` document.
    pub fn to_json(&self) -> String {
        let task = match self {
            RunError::Task { task, .. } => json!(task),
            _ => serde_json::Value::Null,
        };
        let message = match self {
            RunError::Task { error, .. } => error.to_string(),
            other => other.to_string(),
        };
        let mut s = serde_json::to_string_pretty(&json!({
            "code": self.code(),
            "message": message,
            "task": task,
        }))
        .expect("error document serializes");
        s.push('\n');
        s
    }
}

/// Files written by one task.
#[derive(Debug, Clone, PartialEq)]
pub struct TaskOutput {
    pub task: String,
    pub files: Vec<PathBuf>,
}

struct Output {
    report: Report,
    table: Option<Table>,
}

impl From<Report> for Output {
    fn from(report: Report) -> Self {
        Output { report, table: None }
    }
}

fn write(path: PathBuf, contents: &str) -> std::result::Result<PathBuf, RunError> {
    fs::write(&path, contents).map_err(|source| RunError::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

/// Runs every task in order, writing into `out_dir` (created if missing).
pub fn run(scenario: &Scenario, out_dir: &Path) -> std::result::Result<Vec<TaskOutput>, RunError> {
    fs::create_dir_all(out_dir).map_err(|source| RunError::Io {
        path: out_dir.to_path_buf(),
        source,
    })?;
    let error_path = out_dir.join("error.json");
    if error_path.exists() {
        fs::remove_file(&error_path).map_err(|source| RunError::Io {
            path: error_path.clone(),
            source,
        })?;
    }
    let mut runner = Runner {
        scenario,
        path_a: scenario.path_a.clone(),
    };
    let mut outputs = Vec::new();
    for task in scenario.tasks() {
        let stem = task.stem();
        let result = runner.execute(task).map(|mut out| {
            out.report.text("task", task.kind());
            out.report.text("scenario", scenario.name());
            out
        });
        match result {
            Ok(out) => {
                let mut files = vec![write(out_dir.join(format!("{stem}.json")), &out.report.to_json())?];
                if let Some(table) = out.table {
                    files.push(write(out_dir.join(format!("{stem}.csv")), &table.to_csv())?);
                }
                outputs.push(TaskOutput { task: stem, files });
            }
            Err(error) => {
                let err = RunError::Task { task: stem, error };
                write(error_path, &err.to_json())?;
                return Err(err);
            }
        }
    }
    Ok(outputs)
}

struct Runner<'a> {
    scenario: &'a Scenario,
    /// Path of subsystem `a`; replaced by `pt-build`.
    path_a: UnitaryPath,
}

impl Runner<'_> {
    fn index(&self, tau: Option<usize>) -> usize {
        tau.unwrap_or(self.scenario.grid.last_index())
    }

    fn execute(&mut self, task: &TaskDoc) -> Result<Output> {
        match task {
            TaskDoc::Phases { tau, .. } => self.phases(self.index(*tau)).map(Output::from),
            TaskDoc::Decompose { period, .. } => self.decompose(self.index(*period)).map(Output::from),
            TaskDoc::Mixed { tau, .. } => self.mixed(self.index(*tau)).map(Output::from),
            TaskDoc::Compare {
                tau,
                agreement_tol,
                basis_explicit,
                ..
            } => self
                .compare(self.index(*tau), *agreement_tol, *basis_explicit)
                .map(Output::from),
            TaskDoc::PtCheck { .. } => self.pt_check().map(Output::from),
            TaskDoc::PtBuild { transport, .. } => self.pt_build(*transport).map(Output::from),
            TaskDoc::Interfere {
                tau,
                mode,
                chi_count,
                noise_sigma,
                ..
            } => {
                let options = SweepOptions {
                    chi_count: *chi_count,
                    visibility_floor: DEFAULT_VISIBILITY_FLOOR,
                    noise: noise_sigma.filter(|s| *s > 0.0).map(|sigma| Noise {
                        sigma,
                        seed: self.scenario.seed,
                    }),
                };
                self.interfere(self.index(*tau), *mode, &options)
            }
            TaskDoc::Gauge {
                tau, family, preset, ..
            } => self.gauge(self.index(*tau), *family, *preset).map(Output::from),
        }
    }

    fn phases(&self, tau: usize) -> Result<Report> {
        let s = self.scenario;
        let r = geometric_phase_entangled(&s.state, &self.path_a, &s.path_b, tau, &s.tolerances)?;
        let mut out = phase_report(&r)?;
        out.int("tau_index", tau as i64);
        out.num("tau", s.grid.time(tau))?;
        let sum = r.component_sum();
        out.opt_num("component_sum", sum)?;
        out.opt_num("separability_gap", sum.map(|c| r.gamma - c))?;
        out.opt_num("separability_gap_mod_2pi", sum.map(|c| circular_distance(r.gamma, c)))?;
        Ok(out)
    }

    fn decompose(&self, period: usize) -> Result<Report> {
        let s = self.scenario;
        let r = cyclic_decomposition(&s.schmidt, &self.path_a, &s.path_b, period, &s.tolerances)?;
        let mut out = phase_report(&r)?;
        out.int("tau_index", period as i64);
        out.num("tau", s.grid.time(period))?;
        let sum = r.decomposition_sum();
        out.opt_num("decomposition_sum", sum)?;
        out.opt_num("decomposition_gap", sum.map(|d| r.gamma - d))?;
        Ok(out)
    }

    fn mixed(&self, tau: usize) -> Result<Report> {
        let s = self.scenario;
        let gamma = mixed_geometric_phase(&s.schmidt, &self.path_a, tau, &s.tolerances)?;
        let total = mixed_total_phase(&s.schmidt, &self.path_a, tau, &s.tolerances)?;
        let mut out = Report::new();
        out.int("tau_index", tau as i64);
        out.num("tau", s.grid.time(tau))?;
        out.num("gamma_mixed", gamma)?;
        out.num("alpha_mixed", total.alpha)?;
        out.num("visibility", total.visibility)?;
        out.nums("component_visibilities", &total.component_visibilities)?;
        out.nums("p", s.schmidt.coefficients())?;
        Ok(out)
    }

    fn compare(&self, tau: usize, agreement_tol: f64, basis_explicit: bool) -> Result<Report> {
        let s = self.scenario;
        let r = if basis_explicit {
            compare_phases_in_basis(&s.schmidt, &self.path_a, tau, &s.tolerances, agreement_tol)?
        } else {
            compare_phases(&s.schmidt, &self.path_a, tau, &s.tolerances, agreement_tol)?
        };
        let mut out = Report::new();
        out.int("tau_index", tau as i64);
        out.num("tau", s.grid.time(tau))?;
        out.num("gamma_mixed", r.gamma_mixed)?;
        out.num("alpha_mixed", r.alpha_mixed)?;
        out.num("visibility", r.visibility)?;
        out.nums("component_visibilities", &r.component_visibilities)?;
        out.num("gamma_entangled_one_sided", r.gamma_entangled)?;
        out.num("phase_factor_gap", r.phase_factor_gap)?;
        out.num("agreement_tol", agreement_tol)?;
        out.flag("equal_under_pt", r.phases_agree);
        out.num("pt_residual", r.pt_residual)?;
        out.num("gamma_b", r.gamma_b)?;
        out.num("gamma_b_mixed", r.gamma_b_mixed)?;
        out.flag("basis_explicit", basis_explicit);
        Ok(out)
    }

    fn residual_report(&self, out: &mut Report) -> Result<()> {
        let s = self.scenario;
        let ra = pt_residuals(&self.path_a, s.schmidt.basis_a())?;
        let rb = pt_residuals(&s.path_b, s.schmidt.basis_b())?;
        let mut pure: f64 = 0.0;
        let energies: Vec<Vec<f64>> = (0..s.schmidt.rank()).map(|i| self.path_a.energies(&s.schmidt.mu(i))).collect();
        for k in 0..s.grid.len() {
            let mean: f64 = s.schmidt.coefficients().iter().zip(&energies).map(|(p, e)| p * e[k]).sum();
            pure = pure.max(mean.abs());
        }
        out.nums("pt_residuals_a", &ra)?;
        out.nums("pt_residuals_b", &rb)?;
        out.num("pt_residual_max", ra.iter().chain(&rb).copied().fold(0.0, f64::max))?;
        out.num("pure_pt_residual_a", pure)?;
        out.int("steps", s.grid.steps() as i64);
        Ok(())
    }

    fn pt_check(&self) -> Result<Report> {
        let mut out = Report::new();
        self.residual_report(&mut out)?;
        Ok(out)
    }

    fn pt_build(&mut self, transport: TransportKind) -> Result<Report> {
        let s = self.scenario;
        self.path_a = match transport {
            TransportKind::Mixed => make_parallel_transporting(&self.path_a, s.schmidt.basis_a())?,
            TransportKind::Pure => make_pure_parallel_transporting(&self.path_a, &s.schmidt)?,
        };
        let mut out = Report::new();
        out.text(
            "transport",
            match transport {
                TransportKind::Mixed => "mixed",
                TransportKind::Pure => "pure",
            },
        );
        self.residual_report(&mut out)?;
        Ok(out)
    }

    fn interfere(&self, tau: usize, mode: crate::interferometry::Mode, options: &SweepOptions) -> Result<Output> {
        let s = self.scenario;
        let u = self.path_a.unitary(tau);
        let fit = sweep_and_fit(mode, &s.state, u, options)?;
        let (shift, visibility) = analytic_fringe(mode, &s.state, u)?;
        let mut out = Report::new();
        out.text("mode", mode.as_str());
        out.int("tau_index", tau as i64);
        out.num("tau", s.grid.time(tau))?;
        out.int("chi_count", fit.chi_samples.len() as i64);
        out.num("fitted_shift", fit.fitted_shift)?;
        out.num("fitted_visibility", fit.fitted_visibility)?;
        out.num("fitted_offset", fit.fitted_offset)?;
        out.num("fit_residual", fit.fit_residual)?;
        out.num("analytic_shift", shift)?;
        out.num("analytic_visibility", visibility)?;
        out.opt_num("noise_sigma", options.noise.map(|n| n.sigma))?;
        let mut table = Table::new(&["chi", "intensity"]);
        for (chi, i) in fit.chi_samples.iter().zip(&fit.intensities) {
            table.push(vec![*chi, *i])?;
        }
        Ok(Output {
            report: out,
            table: Some(table),
        })
    }

    fn gauge(&self, tau: usize, family: GaugeFamily, preset: GaugePreset) -> Result<Report> {
        let s = self.scenario;
        let grid = s.grid;
        let shape = move |scale: f64, t: f64| match preset {
            GaugePreset::Linear { rate } => scale * rate * t,
            GaugePreset::Sinusoidal { amplitude, frequency } => scale * amplitude * (frequency * t).sin(),
        };
        let rate = move |scale: f64, t: f64| match preset {
            GaugePreset::Linear { rate } => scale * rate,
            GaugePreset::Sinusoidal { amplitude, frequency } => scale * amplitude * frequency * (frequency * t).cos(),
        };
        let mut out = Report::new();
        out.int("tau_index", tau as i64);
        out.num("tau", grid.time(tau))?;
        match family {
            GaugeFamily::S1 => {
                let theta = GaugeFunction::smooth(grid, 1, |_, t| shape(1.0, t), |_, t| rate(1.0, t))?;
                let gauged = apply_s1(&self.path_a, &theta)?;
                let before = geometric_phase_entangled(&s.state, &self.path_a, &s.path_b, tau, &s.tolerances)?;
                let after = geometric_phase_entangled(&s.state, &gauged, &s.path_b, tau, &s.tolerances)?;
                out.text("family", "s1");
                out.num("theta_tau", theta.value(0, tau))?;
                out.num("gamma_before", before.gamma)?;
                out.num("gamma_after", after.gamma)?;
                out.num("gamma_change", after.gamma - before.gamma)?;
            }
            GaugeFamily::S2 => {
                let n = s.schmidt.rank();
                let thetas = GaugeFunction::smooth(
                    grid,
                    n,
                    |i, t| shape((i + 1) as f64, t),
                    |i, t| rate((i + 1) as f64, t),
                )?;
                let gauged = apply_s2(&self.path_a, &thetas, s.schmidt.basis_a())?;
                let tol = &s.tolerances;
                let mixed_before = mixed_geometric_phase(&s.schmidt, &self.path_a, tau, tol)?;
                let mixed_after = mixed_geometric_phase(&s.schmidt, &gauged, tau, tol)?;
                let ent_before = entangled_phase_one_sided(&s.schmidt, &self.path_a, tau, tol)?;
                let ent_after = entangled_phase_one_sided(&s.schmidt, &gauged, tau, tol)?;
                let predicted = s2_predicted_entangled_phase(&s.schmidt, &self.path_a, &thetas, tau, tol.overlap_tol)?;
                let thetas_tau: Vec<f64> = (0..n).map(|i| thetas.value(i, tau)).collect();
                let weighted: f64 = s.schmidt.coefficients().iter().zip(&thetas_tau).map(|(p, t)| p * t).sum();
                out.text("family", "s2");
                out.nums("theta_tau", &thetas_tau)?;
                out.num("weighted_theta_tau", weighted)?;
                out.num("gamma_mixed_before", mixed_before)?;
                out.num("gamma_mixed_after", mixed_after)?;
                out.num("gamma_mixed_change", circular_distance(mixed_before, mixed_after))?;
                out.num("gamma_entangled_before", ent_before)?;
                out.num("gamma_entangled_after", ent_after)?;
                out.num("gamma_entangled_predicted", predicted)?;
                out.num("prediction_gap", ent_after - predicted)?;
            }
        }
        Ok(out)
    }
}
