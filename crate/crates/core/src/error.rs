//! Error type shared by every numerical module.

use thiserror::Error;

/// Failures raised by the phase computations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum PhaseError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("state is not normalized: squared norm {norm_sqr}")]
    Normalization { norm_sqr: f64 },

    #[error("invalid evolution specification: {0}")]
    Spec(String),

    #[error("time grids differ: {0}")]
    Grid(String),

    #[error("phase undefined: overlap modulus {modulus:.3e} below {tol:.1e} ({context})")]
    UndefinedPhase {
        modulus: f64,
        tol: f64,
        context: String,
    },

    #[error("Schmidt spectrum is degenerate within {tol:.1e}: {coefficients:?}")]
    Degeneracy { coefficients: Vec<f64>, tol: f64 },

    #[error("evolution is not cyclic: residual {residual:.3e} >= {tol:.1e}")]
    NotCyclic { residual: f64, tol: f64 },

    #[error("cyclic consistency violated: component {component} phase differs by {deviation:.3e}")]
    CyclicConsistency { component: usize, deviation: f64 },

    #[error("time step too coarse: phase increment {increment:.3} rad at step {step}")]
    StepTooCoarse { step: usize, increment: f64 },

    #[error("phase shift undefined: visibility {visibility:.3e} below floor {floor:.1e}")]
    ShiftUndefined { visibility: f64, floor: f64 },

    #[error("winding number not integral: {value} (component {component})")]
    NonIntegerWinding { component: usize, value: f64 },

    #[error("non-finite value encountered in {0}")]
    NonFinite(String),

    #[error("consistency check failed: {0}")]
    Inconsistent(String),
}

impl PhaseError {
    /// Stable machine-readable code used in CLI error reports.
    pub fn code(&self) -> &'static str {
        match self {
            PhaseError::Dimension(_) => "dimension",
            PhaseError::Normalization { .. } => "normalization",
            PhaseError::Spec(_) => "spec",
            PhaseError::Grid(_) => "grid",
            PhaseError::UndefinedPhase { .. } => "undefined_phase",
            PhaseError::Degeneracy { .. } => "degeneracy",
            PhaseError::NotCyclic { .. } => "not_cyclic",
            PhaseError::CyclicConsistency { .. } => "cyclic_consistency",
            PhaseError::StepTooCoarse { .. } => "step_too_coarse",
            PhaseError::ShiftUndefined { .. } => "shift_undefined",
            PhaseError::NonIntegerWinding { .. } => "non_integer_winding",
            PhaseError::NonFinite(_) => "non_finite",
            PhaseError::Inconsistent(_) => "inconsistent",
        }
    }

    /// True for failures that come from the numerics rather than from malformed input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self,
            PhaseError::Dimension(_)
                | PhaseError::Normalization { .. }
                | PhaseError::Spec(_)
                | PhaseError::Grid(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, PhaseError>;
