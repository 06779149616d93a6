//! Geometric phases of entangled bipartite pure states under bi-local unitary
//! evolution `U_a(t) ⊗ U_b(t)`, and their relation to the phases of the
//! subsystems.
//!
//! * [`tensor`]: bipartite states, Schmidt decomposition, partial trace.
//! * [`evolution`]: sampled unitary paths and their generators.
//! * [`phases`]: total, dynamical and geometric phases, and the cyclic
//!   decomposition into Schmidt-component phases.
//! * [`mixedstate`]: mixed-state phase of the reduced density operator.
//! * [`gauge`]: gauge transformations and parallel transport.
//! * [`interferometry`]: interferometric readout of the phases.
//! * [`scenario`]: JSON scenario files driving the command-line tool.

pub mod angle;
pub mod error;
pub mod evolution;
pub mod gauge;
pub mod interferometry;
pub mod mixedstate;
pub mod phases;
pub mod report;
pub mod run;
pub mod sampling;
pub mod scenario;
pub mod tensor;

pub use error::{PhaseError, Result};
pub use evolution::{build_path, EvolutionSpec, TimeGrid, UnitaryPath};
pub use phases::{cyclic_decomposition, geometric_phase_entangled, PhaseReport};
pub use tensor::{schmidt_decompose, BipartiteState, SchmidtForm};

/// Numerical thresholds shared by the phase computations.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `1 − |⟨Ψ(0)|Ψ(T)⟩|` below this counts as cyclic.
    pub cyclic_tol: f64,
    /// Schmidt coefficients closer than this count as equal (or as zero).
    pub degeneracy_tol: f64,
    /// Overlap moduli below this make a phase undefined.
    pub overlap_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cyclic_tol: 1e-9,
            degeneracy_tol: 1e-9,
            overlap_tol: 1e-10,
        }
    }
}
