//! Phases of the reduced state `ρ_a(t) = U_a(t) ρ_a(0) U_a†(t)` when only
//! subsystem `a` evolves, and their comparison with the phase of the entangled
//! pure state.
//!
//! With `p_i`, `|μ_i⟩` the Schmidt weights and vectors of subsystem `a`:
//!
//! * mixed-state geometric phase `γ_a^M = arg Σ_i p_i ⟨μ_i|U|μ_i⟩ e^{−iβ_ai}`;
//! * mixed-state total phase `α_a^M = arg Tr(ρ_a(0) U)`, visibility `|Tr(ρ_a(0) U)|`;
//! * entangled-state phase `γ_a = α − Σ_i p_i β_ai` with `α` the total phase
//!   of `(U ⊗ I)|Ψ(0)⟩`.
//!
//! The two geometric phases coincide (modulo 2π) when `U` parallel-transports
//! every `|μ_i⟩`, and differ in general otherwise.

use num_complex::Complex64;

use crate::angle::{arg_2pi, phase_factor_distance, unwrap_phases};
use crate::error::{PhaseError, Result};
use crate::evolution::UnitaryPath;
use crate::gauge::pt_residuals;
use crate::tensor::{identity, sandwich, ComplexMatrix, SchmidtForm};
use crate::Tolerances;

/// Default tolerance on `|e^{iγ_a} − e^{iγ_a^M}|` when deciding agreement.
pub const DEFAULT_AGREEMENT_TOL: f64 = 1e-6;

/// Tolerance on `Tr(ρ_a U) = ⟨Ψ(0)|U ⊗ I|Ψ(0)⟩`.
pub const TRACE_IDENTITY_TOL: f64 = 1e-10;

/// `ρ_a(t_k) = U(t_k) ρ_a(0) U†(t_k)` along the grid.
pub fn reduced_path(schmidt: &SchmidtForm, path_a: &UnitaryPath) -> Result<Vec<ComplexMatrix>> {
    path_a.check_dim(schmidt.dim_a(), "subsystem a")?;
    let rho0 = schmidt.reduced_density_a();
    Ok(path_a
        .unitaries()
        .iter()
        .map(|u| u * &rho0 * u.adjoint())
        .collect())
}

fn check_weights(schmidt: &SchmidtForm, tol: &Tolerances) -> Result<()> {
    if schmidt.positive_weights_distinct(tol.degeneracy_tol) {
        Ok(())
    } else {
        Err(PhaseError::Degeneracy {
            coefficients: schmidt.coefficients().to_vec(),
            tol: tol.degeneracy_tol,
        })
    }
}

fn weighted_diagonal<'a>(
    schmidt: &'a SchmidtForm,
    u: &'a ComplexMatrix,
) -> impl Iterator<Item = (f64, Complex64)> + 'a {
    (0..schmidt.rank()).map(move |i| {
        let mu = schmidt.mu(i);
        (schmidt.coefficients()[i], sandwich(&mu, u, &mu))
    })
}

fn require_modulus(z: Complex64, tol: f64, context: &str) -> Result<Complex64> {
    if z.norm() < tol {
        Err(PhaseError::UndefinedPhase {
            modulus: z.norm(),
            tol,
            context: context.into(),
        })
    } else {
        Ok(z)
    }
}

/// Mixed-state geometric phase `γ_a^M(τ)` in `[0, 2π)`.
///
/// Refuses spectra in which two nonzero weights coincide, since the
/// eigenvectors of `ρ_a(0)` are then not fixed.
pub fn mixed_geometric_phase(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
) -> Result<f64> {
    check_weights(schmidt, tol)?;
    mixed_geometric_phase_in_basis(schmidt, path_a, tau, tol)
}

/// [`mixed_geometric_phase`] evaluated in the supplied eigenbasis without
/// checking that the basis is uniquely determined by `ρ_a(0)`.
pub fn mixed_geometric_phase_in_basis(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
) -> Result<f64> {
    path_a.check_dim(schmidt.dim_a(), "subsystem a")?;
    path_a.check_index(tau)?;
    let mut sum = Complex64::new(0.0, 0.0);
    for (i, (p, z)) in weighted_diagonal(schmidt, path_a.unitary(tau)).enumerate() {
        if p == 0.0 {
            continue;
        }
        let beta = path_a.dynamical_phase(&schmidt.mu(i), tau)?;
        sum += p * z * Complex64::from_polar(1.0, -beta);
    }
    let sum = require_modulus(sum, tol.overlap_tol, "Σ p_i ⟨μ_i|U|μ_i⟩ e^{−iβ_i}")?;
    Ok(arg_2pi(sum))
}

/// Mixed-state total phase and interferometric visibility.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTotalPhase {
    /// `arg Tr(ρ_a(0) U(τ))` in `[0, 2π)`.
    pub alpha: f64,
    /// `|Tr(ρ_a(0) U(τ))|`.
    pub visibility: f64,
    /// `|⟨μ_i|U(τ)|μ_i⟩|`.
    pub component_visibilities: Vec<f64>,
}

/// `Tr(ρ_a(0) U(τ))`, checked against `⟨Ψ(0)|U ⊗ I|Ψ(0)⟩`.
pub fn mixed_total_phase(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
) -> Result<MixedTotalPhase> {
    path_a.check_dim(schmidt.dim_a(), "subsystem a")?;
    path_a.check_index(tau)?;
    let u = path_a.unitary(tau);
    let mut trace = Complex64::new(0.0, 0.0);
    let mut component_visibilities = Vec::with_capacity(schmidt.rank());
    for (p, z) in weighted_diagonal(schmidt, u) {
        trace += p * z;
        component_visibilities.push(z.norm());
    }
    let full = schmidt.reassemble().local_a_expectation(u)?;
    let gap = (full - trace).norm();
    if gap > TRACE_IDENTITY_TOL {
        return Err(PhaseError::Inconsistent(format!(
            "Tr(ρ_a U) and ⟨Ψ|U ⊗ I|Ψ⟩ differ by {gap:.3e}"
        )));
    }
    let trace = require_modulus(trace, tol.overlap_tol, "Tr(ρ_a U)")?;
    Ok(MixedTotalPhase {
        alpha: arg_2pi(trace),
        visibility: trace.norm(),
        component_visibilities,
    })
}

/// Geometric phase of the entangled state when only `a` evolves:
/// `γ_a(τ) = α(τ) − Σ_i p_i β_ai(τ)`, with `α` followed continuously along
/// the grid, so the result is non-modular.
pub fn entangled_phase_one_sided(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
) -> Result<f64> {
    path_a.check_dim(schmidt.dim_a(), "subsystem a")?;
    path_a.check_index(tau)?;
    let overlaps: Vec<Complex64> = path_a.unitaries()[..=tau]
        .iter()
        .map(|u| weighted_diagonal(schmidt, u).map(|(p, z)| p * z).sum())
        .collect();
    require_modulus(overlaps[tau], tol.overlap_tol, "⟨Ψ(0)|U ⊗ I|Ψ(0)⟩")?;
    let alpha = unwrap_phases(&overlaps, tol.overlap_tol)?[tau];
    let mut beta = 0.0;
    for (i, &p) in schmidt.coefficients().iter().enumerate() {
        if p > 0.0 {
            beta += p * path_a.dynamical_phase(&schmidt.mu(i), tau)?;
        }
    }
    Ok(alpha - beta)
}

/// Side-by-side mixed-state and entangled-state phases for one path.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedPhaseReport {
    /// `γ_a^M` in `[0, 2π)`.
    pub gamma_mixed: f64,
    /// `α_a^M` in `[0, 2π)`.
    pub alpha_mixed: f64,
    pub visibility: f64,
    pub component_visibilities: Vec<f64>,
    /// `γ_a`, non-modular.
    pub gamma_entangled: f64,
    /// `|e^{iγ_a} − e^{iγ_a^M}|`.
    pub phase_factor_gap: f64,
    /// Whether `phase_factor_gap` is below the agreement tolerance.
    pub phases_agree: bool,
    /// `max_i max_k |⟨μ_i|U†U̇|μ_i⟩|`; zero for an exactly parallel-transporting path.
    pub pt_residual: f64,
    /// Subsystem `b` stays put, so both of its phases vanish identically.
    pub gamma_b: f64,
    pub gamma_b_mixed: f64,
}

/// Compares `γ_a` with `γ_a^M`; refuses spectra with coinciding nonzero weights.
pub fn compare_phases(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
    agreement_tol: f64,
) -> Result<MixedPhaseReport> {
    check_weights(schmidt, tol)?;
    compare_phases_in_basis(schmidt, path_a, tau, tol, agreement_tol)
}

/// [`compare_phases`] evaluated in the supplied Schmidt basis, accepting
/// degenerate spectra.
pub fn compare_phases_in_basis(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
    agreement_tol: f64,
) -> Result<MixedPhaseReport> {
    let gamma_mixed = mixed_geometric_phase_in_basis(schmidt, path_a, tau, tol)?;
    let total = mixed_total_phase(schmidt, path_a, tau, tol)?;
    let gamma_entangled = entangled_phase_one_sided(schmidt, path_a, tau, tol)?;
    let gap = phase_factor_distance(gamma_entangled, gamma_mixed);
    let pt_residual = pt_residuals(path_a, schmidt.basis_a())?
        .into_iter()
        .fold(0.0, f64::max);

    let swapped = schmidt.swapped();
    let still = UnitaryPath::identity(schmidt.dim_b(), *path_a.grid());
    debug_assert_eq!(still.unitary(tau), &identity(schmidt.dim_b()));
    let gamma_b = entangled_phase_one_sided(&swapped, &still, tau, tol)?;
    let gamma_b_mixed = mixed_geometric_phase_in_basis(&swapped, &still, tau, tol)?;

    Ok(MixedPhaseReport {
        gamma_mixed,
        alpha_mixed: total.alpha,
        visibility: total.visibility,
        component_visibilities: total.component_visibilities,
        gamma_entangled,
        phase_factor_gap: gap,
        phases_agree: gap < agreement_tol,
        pt_residual,
        gamma_b,
        gamma_b_mixed,
    })
}
