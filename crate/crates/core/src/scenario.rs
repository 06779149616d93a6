//! JSON scenario files: document types, parsing, and validation into
//! ready-to-run inputs.
//!
//! Complex numbers are `[re, im]` pairs. Matrices are lists of rows. Basis
//! vectors are given as a list of vectors, one per basis element.
//!
//! ```json
//! {
//!   "name": "qubit_pair",
//!   "dims": [2, 2],
//!   "initial_state": {"schmidt": {"p": [0.75, 0.25]}},
//!   "evolution_a": {"kind": "constant_hamiltonian", "h": [[[0,0],[0,0]], [[0,0],[1,0]]]},
//!   "grid": {"t_final": 6.283185307179586, "steps": 4096},
//!   "tasks": [{"task": "phases"}, {"task": "decompose"}]
//! }
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::evolution::{build_path, EvolutionSpec, TimeGrid, UnitaryPath};
use crate::interferometry::{Mode, MIN_CHI_COUNT};
use crate::tensor::{
    schmidt_decompose, BipartiteState, ComplexMatrix, ComplexVector, SchmidtForm,
};
use crate::Tolerances;

pub type ComplexDoc = [f64; 2];
pub type VectorDoc = Vec<ComplexDoc>;
pub type MatrixDoc = Vec<Vec<ComplexDoc>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDoc {
    pub name: String,
    #[serde(default)]
    pub description: Option<String>,
    /// `[dim_a, dim_b]`.
    pub dims: [usize; 2],
    pub initial_state: InitialStateDoc,
    pub evolution_a: EvolutionDoc,
    #[serde(default = "EvolutionDoc::identity")]
    pub evolution_b: EvolutionDoc,
    pub grid: GridDoc,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Seed of the optional interferometer noise.
    #[serde(default)]
    pub seed: u64,
    pub tasks: Vec<TaskDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateDoc {
    /// Amplitudes indexed by `i_a · dim_b + i_b`.
    #[serde(default)]
    pub amplitudes: Option<VectorDoc>,
    #[serde(default)]
    pub schmidt: Option<SchmidtDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchmidtDoc {
    pub p: Vec<f64>,
    /// `|μ_i⟩`; standard basis when absent.
    #[serde(default)]
    pub basis_a: Option<Vec<VectorDoc>>,
    /// `|ν_i⟩`; standard basis when absent.
    #[serde(default)]
    pub basis_b: Option<Vec<VectorDoc>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EvolutionDoc {
    Identity,
    ConstantHamiltonian {
        h: MatrixDoc,
    },
    PiecewiseConstantHamiltonian {
        segments: Vec<SegmentDoc>,
    },
    SampledUnitaries {
        u: Vec<MatrixDoc>,
    },
    /// `V(t)` made parallel-transporting for `basis` (the subsystem's Schmidt
    /// vectors when absent).
    ParallelTransported {
        v: Box<EvolutionDoc>,
        #[serde(default)]
        basis: Option<Vec<VectorDoc>>,
    },
}

impl EvolutionDoc {
    fn identity() -> Self {
        EvolutionDoc::Identity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentDoc {
    pub duration: f64,
    pub h: MatrixDoc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridDoc {
    pub t_final: f64,
    pub steps: usize,
}

/// One unit of work; `name` sets the output file stem (defaults to the task kind).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskDoc {
    /// Total, dynamical and geometric phase of the entangled state at grid index `tau`.
    Phases {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        tau: Option<usize>,
    },
    /// Cyclic decomposition into Schmidt-component phases at grid index `period`.
    Decompose {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        period: Option<usize>,
    },
    /// Mixed-state phase, total phase and visibility of subsystem `a`.
    Mixed {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        tau: Option<usize>,
    },
    /// Mixed-state versus entangled-state phase of subsystem `a`.
    Compare {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        tau: Option<usize>,
        #[serde(default = "default_agreement_tol")]
        agreement_tol: f64,
        /// Evaluate in the given Schmidt basis even if its weights are degenerate.
        #[serde(default)]
        basis_explicit: bool,
    },
    /// Parallel-transport residuals of both paths in their Schmidt bases.
    PtCheck {
        #[serde(default)]
        name: Option<String>,
    },
    /// Replaces the path of subsystem `a` with its parallel-transporting version.
    PtBuild {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        transport: TransportKind,
    },
    /// Interferometer sweep of the `χ` shift.
    Interfere {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        tau: Option<usize>,
        #[serde(default = "default_mode")]
        mode: Mode,
        #[serde(default = "default_chi_count")]
        chi_count: usize,
        /// Standard deviation of additive Gaussian noise on the intensities.
        #[serde(default)]
        noise_sigma: Option<f64>,
    },
    /// Gauge transformation of the path of subsystem `a` and its effect on the phases.
    Gauge {
        #[serde(default)]
        name: Option<String>,
        #[serde(default)]
        tau: Option<usize>,
        family: GaugeFamily,
        preset: GaugePreset,
    },
}

fn default_agreement_tol() -> f64 {
    crate::mixedstate::DEFAULT_AGREEMENT_TOL
}

fn default_mode() -> Mode {
    Mode::Coincidence
}

fn default_chi_count() -> usize {
    64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransportKind {
    /// Every Schmidt vector of `a` is parallel transported.
    #[default]
    Mixed,
    /// Only the entangled pure state is parallel transported.
    Pure,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GaugeFamily {
    /// Global phase `e^{iθ(t)}`.
    S1,
    /// Phases `e^{iθ_i(t)}` on each Schmidt vector of `a`.
    S2,
}

/// `θ_i(t)` presets; component `i` is scaled by `i + 1` for the vector family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case", deny_unknown_fields)]
pub enum GaugePreset {
    /// `θ(t) = rate · t`.
    Linear { rate: f64 },
    /// `θ(t) = amplitude · sin(frequency · t)`.
    Sinusoidal { amplitude: f64, frequency: f64 },
}

impl TaskDoc {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskDoc::Phases { .. } => "phases",
            TaskDoc::Decompose { .. } => "decompose",
            TaskDoc::Mixed { .. } => "mixed",
            TaskDoc::Compare { .. } => "compare",
            TaskDoc::PtCheck { .. } => "pt-check",
            TaskDoc::PtBuild { .. } => "pt-build",
            TaskDoc::Interfere { .. } => "interfere",
            TaskDoc::Gauge { .. } => "gauge",
        }
    }

    /// Output file stem.
    pub fn stem(&self) -> String {
        let name = match self {
            TaskDoc::Phases { name, .. }
            | TaskDoc::Decompose { name, .. }
            | TaskDoc::Mixed { name, .. }
            | TaskDoc::Compare { name, .. }
            | TaskDoc::PtCheck { name }
            | TaskDoc::PtBuild { name, .. }
            | TaskDoc::Interfere { name, .. }
            | TaskDoc::Gauge { name, .. } => name,
        };
        name.clone().unwrap_or_else(|| self.kind().to_string())
    }

    fn grid_index(&self) -> Option<usize> {
        match self {
            TaskDoc::Phases { tau, .. }
            | TaskDoc::Mixed { tau, .. }
            | TaskDoc::Compare { tau, .. }
            | TaskDoc::Interfere { tau, .. }
            | TaskDoc::Gauge { tau, .. } => *tau,
            TaskDoc::Decompose { period, .. } => *period,
            TaskDoc::PtCheck { .. } | TaskDoc::PtBuild { .. } => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error at {path} (line {line}, column {column}): {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid field {field}: {message}")]
    Validation { field: String, message: String },
}

impl ScenarioError {
    pub fn code(&self) -> &'static str {
        match self {
            ScenarioError::Parse { .. } => "parse",
            ScenarioError::Validation { .. } => "validation",
        }
    }

    fn invalid(field: impl Into<String>, message: impl ToString) -> Self {
        ScenarioError::Validation {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

/// Command-line overrides applied before validation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Overrides {
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

/// A validated scenario with its state and paths built.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub doc: ScenarioDoc,
    pub grid: TimeGrid,
    pub state: BipartiteState,
    pub schmidt: SchmidtForm,
    pub path_a: UnitaryPath,
    pub path_b: UnitaryPath,
    pub tolerances: Tolerances,
    pub seed: u64,
}

impl Scenario {
    pub fn name(&self) -> &str {
        &self.doc.name
    }

    pub fn tasks(&self) -> &[TaskDoc] {
        &self.doc.tasks
    }
}

pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    parse_scenario_with(text, &Overrides::default())
}

pub fn parse_scenario_with(text: &str, overrides: &Overrides) -> Result<Scenario, ScenarioError> {
    let mut doc = parse_document(text)?;
    if let Some(steps) = overrides.steps {
        doc.grid.steps = steps;
    }
    if let Some(seed) = overrides.seed {
        doc.seed = seed;
    }
    validate(doc)
}

/// Reads the JSON document without semantic validation.
pub fn parse_document(text: &str) -> Result<ScenarioDoc, ScenarioError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        ScenarioError::Parse {
            path,
            line: inner.line(),
            column: inner.column(),
            message: inner.to_string(),
        }
    })
}

fn complex(c: &ComplexDoc) -> Complex64 {
    Complex64::new(c[0], c[1])
}

fn vector(field: &str, v: &VectorDoc, dim: usize) -> Result<ComplexVector, ScenarioError> {
    if v.len() != dim {
        return Err(ScenarioError::invalid(field, format!("expected {dim} entries, got {}", v.len())));
    }
    if v.iter().flatten().any(|x| !x.is_finite()) {
        return Err(ScenarioError::invalid(field, "entries must be finite"));
    }
    Ok(ComplexVector::from_iterator(dim, v.iter().map(complex)))
}

fn matrix(field: &str, m: &MatrixDoc, dim: usize) -> Result<ComplexMatrix, ScenarioError> {
    if m.len() != dim || m.iter().any(|row| row.len() != dim) {
        return Err(ScenarioError::invalid(field, format!("expected a {dim}×{dim} matrix")));
    }
    if m.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(ScenarioError::invalid(field, "entries must be finite"));
    }
    Ok(ComplexMatrix::from_fn(dim, dim, |r, c| complex(&m[r][c])))
}

/// Columns `|b_i⟩` from a list of vectors.
fn basis(field: &str, vs: &[VectorDoc], dim: usize) -> Result<ComplexMatrix, ScenarioError> {
    if vs.is_empty() || vs.len() > dim {
        return Err(ScenarioError::invalid(field, format!("expected 1 to {dim} vectors, got {}", vs.len())));
    }
    let cols = vs
        .iter()
        .enumerate()
        .map(|(i, v)| vector(&format!("{field}[{i}]"), v, dim))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ComplexMatrix::from_columns(&cols))
}

fn standard_basis(dim: usize, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(dim, n, |r, c| Complex64::new(if r == c { 1.0 } else { 0.0 }, 0.0))
}

fn validate(doc: ScenarioDoc) -> Result<Scenario, ScenarioError> {
    if doc.name.trim().is_empty() {
        return Err(ScenarioError::invalid("name", "must not be empty"));
    }
    let [da, db] = doc.dims;
    if da < 1 || db < 1 {
        return Err(ScenarioError::invalid("dims", "dimensions must be positive"));
    }
    let tol = doc.tolerances;
    for (field, v) in [
        ("tolerances.cyclic_tol", tol.cyclic_tol),
        ("tolerances.degeneracy_tol", tol.degeneracy_tol),
        ("tolerances.overlap_tol", tol.overlap_tol),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(ScenarioError::invalid(field, "must be finite and positive"));
        }
    }
    let grid = TimeGrid::new(doc.grid.t_final, doc.grid.steps).map_err(|e| ScenarioError::invalid("grid", e))?;

    let (state, schmidt) = initial_state(&doc.initial_state, da, db, tol.degeneracy_tol)?;

    let path_a = evolution("evolution_a", &doc.evolution_a, da, grid, schmidt.basis_a())?;
    let path_b = evolution("evolution_b", &doc.evolution_b, db, grid, schmidt.basis_b())?;

    if doc.tasks.is_empty() {
        return Err(ScenarioError::invalid("tasks", "at least one task is required"));
    }
    let mut stems = std::collections::BTreeSet::new();
    for (i, task) in doc.tasks.iter().enumerate() {
        let field = format!("tasks[{i}]");
        let stem = task.stem();
        if stem.is_empty()
            || stem == "error"
            || !stem.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
        {
            return Err(ScenarioError::invalid(
                format!("{field}.name"),
                format!("'{stem}' is not a usable file stem"),
            ));
        }
        if !stems.insert(stem.clone()) {
            return Err(ScenarioError::invalid(
                format!("{field}.name"),
                format!("duplicate output name '{stem}'"),
            ));
        }
        if let Some(k) = task.grid_index() {
            if k > grid.last_index() {
                return Err(ScenarioError::invalid(
                    field,
                    format!("grid index {k} beyond last index {}", grid.last_index()),
                ));
            }
        }
        match task {
            TaskDoc::Interfere {
                chi_count,
                noise_sigma,
                ..
            } => {
                if *chi_count < MIN_CHI_COUNT {
                    return Err(ScenarioError::invalid(
                        format!("{field}.chi_count"),
                        format!("must be at least {MIN_CHI_COUNT}"),
                    ));
                }
                if let Some(s) = noise_sigma {
                    if !(s.is_finite() && *s >= 0.0) {
                        return Err(ScenarioError::invalid(format!("{field}.noise_sigma"), "must be non-negative"));
                    }
                }
            }
            TaskDoc::Compare { agreement_tol, .. } if !(agreement_tol.is_finite() && *agreement_tol > 0.0) => {
                return Err(ScenarioError::invalid(format!("{field}.agreement_tol"), "must be positive"));
            }
            TaskDoc::Gauge { preset, .. } => {
                let ok = match preset {
                    GaugePreset::Linear { rate } => rate.is_finite(),
                    GaugePreset::Sinusoidal { amplitude, frequency } => amplitude.is_finite() && frequency.is_finite(),
                };
                if !ok {
                    return Err(ScenarioError::invalid(format!("{field}.preset"), "parameters must be finite"));
                }
            }
            _ => {}
        }
    }

    Ok(Scenario {
        seed: doc.seed,
        tolerances: tol,
        grid,
        state,
        schmidt,
        path_a,
        path_b,
        doc,
    })
}

fn initial_state(
    doc: &InitialStateDoc,
    da: usize,
    db: usize,
    degeneracy_tol: f64,
) -> Result<(BipartiteState, SchmidtForm), ScenarioError> {
    match (&doc.amplitudes, &doc.schmidt) {
        (Some(amps), None) => {
            let field = "initial_state.amplitudes";
            let v = vector(field, amps, da * db)?;
            let state = BipartiteState::new(da, db, v).map_err(|e| ScenarioError::invalid(field, e))?;
            let schmidt = schmidt_decompose(&state, degeneracy_tol).map_err(|e| ScenarioError::invalid(field, e))?;
            Ok((state, schmidt))
        }
        (None, Some(s)) => {
            let n = da.min(db);
            let ba = match &s.basis_a {
                Some(b) => basis("initial_state.schmidt.basis_a", b, da)?,
                None => standard_basis(da, n),
            };
            let bb = match &s.basis_b {
                Some(b) => basis("initial_state.schmidt.basis_b", b, db)?,
                None => standard_basis(db, n),
            };
            let schmidt = SchmidtForm::from_parts(s.p.clone(), ba, bb, degeneracy_tol).map_err(|e| {
                let message = e.to_string();
                let field = match ["basis_a", "basis_b"].into_iter().find(|b| message.contains(b)) {
                    Some(b) => format!("initial_state.schmidt.{b}"),
                    None => "initial_state.schmidt.p".to_string(),
                };
                ScenarioError::invalid(field, message)
            })?;
            Ok((schmidt.reassemble(), schmidt))
        }
        _ => Err(ScenarioError::invalid(
            "initial_state",
            "exactly one of 'amplitudes' and 'schmidt' must be given",
        )),
    }
}

fn evolution_spec(
    field: &str,
    doc: &EvolutionDoc,
    dim: usize,
    schmidt_basis: &ComplexMatrix,
) -> Result<EvolutionSpec, ScenarioError> {
    Ok(match doc {
        EvolutionDoc::Identity => EvolutionSpec::ConstantHamiltonian(ComplexMatrix::zeros(dim, dim)),
        EvolutionDoc::ConstantHamiltonian { h } => {
            EvolutionSpec::ConstantHamiltonian(matrix(&format!("{field}.h"), h, dim)?)
        }
        EvolutionDoc::PiecewiseConstantHamiltonian { segments } => EvolutionSpec::PiecewiseConstant(
            segments
                .iter()
                .enumerate()
                .map(|(j, s)| Ok((s.duration, matrix(&format!("{field}.segments[{j}].h"), &s.h, dim)?)))
                .collect::<Result<_, ScenarioError>>()?,
        ),
        EvolutionDoc::SampledUnitaries { u } => EvolutionSpec::SampledUnitaries(
            u.iter()
                .enumerate()
                .map(|(k, m)| matrix(&format!("{field}.u[{k}]"), m, dim))
                .collect::<Result<_, _>>()?,
        ),
        EvolutionDoc::ParallelTransported { v, basis: b } => EvolutionSpec::ParallelTransported {
            v: Box::new(evolution_spec(&format!("{field}.v"), v, dim, schmidt_basis)?),
            basis: match b {
                Some(b) => basis(&format!("{field}.basis"), b, dim)?,
                None => schmidt_basis.clone(),
            },
        },
    })
}

fn evolution(
    field: &str,
    doc: &EvolutionDoc,
    dim: usize,
    grid: TimeGrid,
    schmidt_basis: &ComplexMatrix,
) -> Result<UnitaryPath, ScenarioError> {
    let spec = evolution_spec(field, doc, dim, schmidt_basis)?;
    build_path(&spec, grid).map_err(|e| ScenarioError::invalid(field, e))
}

/// Scenario files bundled with the tool, as `(name, JSON text)`.
pub const SHIPPED: &[(&str, &str)] = &[
    ("qubit_pair_2pi_p1", include_str!("../examples/qubit_pair_2pi_p1.json")),
    ("non_cyclic_counterexample", include_str!("../examples/non_cyclic_counterexample.json")),
    ("parallel_transport", include_str!("../examples/parallel_transport.json")),
    ("pure_transport_interferometer", include_str!("../examples/pure_transport_interferometer.json")),
    ("gauge_structure", include_str!("../examples/gauge_structure.json")),
];

/// Text of a bundled scenario.
pub fn shipped(name: &str) -> Option<&'static str> {
    SHIPPED.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
