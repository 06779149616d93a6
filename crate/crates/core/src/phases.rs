//! Total, dynamical and geometric phases of an entangled pure state under
//! bi-local evolution `U_a(t) ⊗ U_b(t)`, and the weighted decomposition of
//! the cyclic geometric phase into Schmidt-component phases.
//!
//! Sign conventions: with `U̇ = −i G U`, the dynamical phase of a component
//! `|v⟩` is `β_v(τ) = −∫₀^τ ⟨v|U†GU|v⟩ dt`, so a constant energy `ω`
//! accumulates `−ωτ`. The geometric phase is `γ = α − β`.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::angle::{arg_2pi, circular_distance, unwrap_phases, wrap_2pi};
use crate::error::{PhaseError, Result};
use crate::evolution::UnitaryPath;
use crate::tensor::{sandwich, schmidt_decompose, BipartiteState, ComplexVector, SchmidtForm};
use crate::Tolerances;

/// Tolerance on the i-independence of `arg[⟨μ_i|U_a|μ_i⟩⟨ν_i|U_b|ν_i⟩]`.
pub const CYCLIC_CONSISTENCY_TOL: f64 = 1e-8;

/// Maximum distance of a winding number from the nearest integer before rounding.
pub const WINDING_INTEGER_TOL: f64 = 1e-6;

/// `arg⟨Ψ(0)|Ψ(τ)⟩` in `[0, 2π)`.
pub fn total_phase(psi0: &BipartiteState, psi_tau: &BipartiteState, overlap_tol: f64) -> Result<f64> {
    let z = psi0.overlap(psi_tau)?;
    if z.norm() < overlap_tol {
        return Err(PhaseError::UndefinedPhase {
            modulus: z.norm(),
            tol: overlap_tol,
            context: "⟨Ψ(0)|Ψ(τ)⟩".into(),
        });
    }
    Ok(arg_2pi(z))
}

/// Dynamical phase split over Schmidt components.
#[derive(Debug, Clone, PartialEq)]
pub struct DynamicalPhase {
    /// `Σ_i p_i (β_ai + β_bi)`.
    pub total: f64,
    pub per_a: Vec<f64>,
    pub per_b: Vec<f64>,
}

/// `β_ai = −∫⟨μ_i|U_a†G_aU_a|μ_i⟩dt` and likewise for `b`, trapezoid rule up to `tau`.
pub fn dynamical_phase(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
    tau: usize,
) -> Result<DynamicalPhase> {
    check_paths(schmidt, path_a, path_b, tau)?;
    let mut per_a = Vec::with_capacity(schmidt.rank());
    let mut per_b = Vec::with_capacity(schmidt.rank());
    let mut total = 0.0;
    for (i, &p) in schmidt.coefficients().iter().enumerate() {
        let ba = path_a.dynamical_phase(&schmidt.mu(i), tau)?;
        let bb = path_b.dynamical_phase(&schmidt.nu(i), tau)?;
        total += p * (ba + bb);
        per_a.push(ba);
        per_b.push(bb);
    }
    Ok(DynamicalPhase { total, per_a, per_b })
}

/// `β(τ) = −∫⟨Ψ|G|Ψ⟩dt` evaluated on the full space.
pub fn full_space_dynamical_phase(psi0: &BipartiteState, path: &UnitaryPath, tau: usize) -> Result<f64> {
    path.check_dim(psi0.dim_a() * psi0.dim_b(), "state")?;
    path.dynamical_phase(psi0.amplitudes(), tau)
}

fn check_paths(schmidt: &SchmidtForm, path_a: &UnitaryPath, path_b: &UnitaryPath, tau: usize) -> Result<()> {
    path_a.check_same_grid(path_b)?;
    path_a.check_dim(schmidt.dim_a(), "subsystem a")?;
    path_b.check_dim(schmidt.dim_b(), "subsystem b")?;
    path_a.check_index(tau)
}

/// Phase data of one pure state `|v⟩` carried by `U(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureComponentPhase {
    /// `arg(⟨v|U(τ)|v⟩ e^{−∫⟨v|U†U̇|v⟩dt})` in `[0, 2π)`.
    pub gamma: f64,
    /// `arg⟨v|U(τ)|v⟩` in `[0, 2π)`.
    pub arg: f64,
    /// `|⟨v|U(τ)|v⟩|`.
    pub overlap_mod: f64,
    pub beta: f64,
}

pub fn pure_component_phase(
    path: &UnitaryPath,
    v: &ComplexVector,
    tau: usize,
    overlap_tol: f64,
) -> Result<PureComponentPhase> {
    path.check_dim(v.len(), "vector")?;
    path.check_index(tau)?;
    let z = sandwich(v, path.unitary(tau), v);
    if z.norm() < overlap_tol {
        return Err(PhaseError::UndefinedPhase {
            modulus: z.norm(),
            tol: overlap_tol,
            context: format!("⟨v|U|v⟩ at grid index {tau}"),
        });
    }
    let beta = path.dynamical_phase(v, tau)?;
    let arg = arg_2pi(z);
    Ok(PureComponentPhase {
        gamma: wrap_2pi(arg - beta),
        arg,
        overlap_mod: z.norm(),
        beta,
    })
}

/// Per-Schmidt-component entries of a [`PhaseReport`].
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentPhases {
    pub weight: f64,
    pub arg_a: f64,
    pub arg_b: f64,
    pub gamma_a: f64,
    pub gamma_b: f64,
    pub beta_a: f64,
    pub beta_b: f64,
    /// `0` or `−1`; set by the cyclic decomposition only.
    pub n_tilde: Option<i64>,
    /// Winding number `n_i`; set by the cyclic decomposition only.
    pub winding: Option<i64>,
    /// `n_i` before rounding.
    pub winding_raw: Option<f64>,
    /// Circular distance of `arg[⟨μ_i|U_a|μ_i⟩⟨ν_i|U_b|ν_i⟩]` from the value for
    /// `i = 0`, or its modulus defect if larger; cyclic decomposition only.
    pub cyclic_deviation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseReport {
    /// Total phase in `[0, 2π)`.
    pub alpha: f64,
    /// Total phase followed continuously along the grid from 0.
    pub alpha_unwrapped: Option<f64>,
    /// Non-modular dynamical phase.
    pub beta: f64,
    /// Non-modular geometric phase. [`geometric_phase_entangled`] uses
    /// `alpha_unwrapped − beta`; [`cyclic_decomposition`] uses `alpha − beta`.
    pub gamma: f64,
    pub cyclic: bool,
    pub cyclic_residual: f64,
    pub components: Vec<ComponentPhases>,
}

impl PhaseReport {
    /// `Σ_i p_i (γ_ai + γ_bi + 2π n_i)` when every winding number is known.
    pub fn decomposition_sum(&self) -> Option<f64> {
        if self.components.is_empty() {
            return None;
        }
        self.components
            .iter()
            .map(|c| {
                c.winding
                    .map(|n| c.weight * (c.gamma_a + c.gamma_b + TAU * n as f64))
            })
            .sum()
    }

    /// `Σ_i p_i (γ_ai + γ_bi)` when component phases are available.
    pub fn component_sum(&self) -> Option<f64> {
        if self.components.is_empty() {
            return None;
        }
        Some(
            self.components
                .iter()
                .map(|c| c.weight * (c.gamma_a + c.gamma_b))
                .sum(),
        )
    }

    pub fn windings(&self) -> Option<Vec<i64>> {
        self.components.iter().map(|c| c.winding).collect()
    }
}

/// `⟨Ψ(0)|U_a(t_k) ⊗ U_b(t_k)|Ψ(0)⟩ = Tr(M† U_a M U_bᵀ)` for `k = 0..=tau`.
fn overlap_history(
    psi0: &BipartiteState,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
    tau: usize,
) -> Vec<Complex64> {
    let m = psi0.amplitude_matrix();
    (0..=tau)
        .map(|k| {
            let evolved = path_a.unitary(k) * &m * path_b.unitary(k).transpose();
            m.dotc(&evolved)
        })
        .collect()
}

/// Geometric phase `γ(τ) = α(τ) − β(τ)` of the entangled state.
///
/// `α` is followed continuously along the grid so `γ` is non-modular. Component
/// phases are filled in when the Schmidt spectrum is non-degenerate and no
/// component overlap vanishes.
pub fn geometric_phase_entangled(
    psi0: &BipartiteState,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
    tau: usize,
    tol: &Tolerances,
) -> Result<PhaseReport> {
    let schmidt = schmidt_decompose(psi0, tol.degeneracy_tol)?;
    check_paths(&schmidt, path_a, path_b, tau)?;
    let overlaps = overlap_history(psi0, path_a, path_b, tau);
    let end = overlaps[tau];
    if end.norm() < tol.overlap_tol {
        return Err(PhaseError::UndefinedPhase {
            modulus: end.norm(),
            tol: tol.overlap_tol,
            context: "⟨Ψ(0)|Ψ(τ)⟩".into(),
        });
    }
    let alpha_unwrapped = unwrap_phases(&overlaps, tol.overlap_tol)?[tau];
    let beta = dynamical_phase(&schmidt, path_a, path_b, tau)?;
    let cyclic_residual = (1.0 - end.norm()).max(0.0);

    let components = if schmidt.non_degenerate() {
        component_phases(&schmidt, path_a, path_b, tau, tol.overlap_tol).unwrap_or_default()
    } else {
        Vec::new()
    };

    Ok(PhaseReport {
        alpha: arg_2pi(end),
        alpha_unwrapped: Some(alpha_unwrapped),
        beta: beta.total,
        gamma: alpha_unwrapped - beta.total,
        cyclic: cyclic_residual < tol.cyclic_tol,
        cyclic_residual,
        components,
    })
}

fn component_phases(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
    tau: usize,
    overlap_tol: f64,
) -> Result<Vec<ComponentPhases>> {
    (0..schmidt.rank())
        .map(|i| {
            let a = pure_component_phase(path_a, &schmidt.mu(i), tau, overlap_tol)?;
            let b = pure_component_phase(path_b, &schmidt.nu(i), tau, overlap_tol)?;
            Ok(ComponentPhases {
                weight: schmidt.coefficients()[i],
                arg_a: a.arg,
                arg_b: b.arg,
                gamma_a: a.gamma,
                gamma_b: b.gamma,
                beta_a: a.beta,
                beta_b: b.beta,
                n_tilde: None,
                winding: None,
                winding_raw: None,
                cyclic_deviation: None,
            })
        })
        .collect()
}

/// `Σ_i p_i (γ_ai(τ) + γ_bi(τ))` with modular component phases; no cyclicity assumed.
pub fn component_phase_sum(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
    tau: usize,
    overlap_tol: f64,
) -> Result<f64> {
    check_paths(schmidt, path_a, path_b, tau)?;
    Ok(component_phases(schmidt, path_a, path_b, tau, overlap_tol)?
        .iter()
        .map(|c| c.weight * (c.gamma_a + c.gamma_b))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CyclicCheck {
    pub cyclic: bool,
    /// `arg⟨Ψ(0)|Ψ(T)⟩` in `[0, 2π)`; meaningful when `cyclic`.
    pub alpha: f64,
    /// `1 − |⟨Ψ(0)|Ψ(T)⟩|`.
    pub residual: f64,
}

/// Whether `|Ψ(T)⟩ = e^{iα}|Ψ(0)⟩` within `cyclic_tol`.
pub fn detect_cyclic(psi0: &BipartiteState, psi_t: &BipartiteState, cyclic_tol: f64) -> Result<CyclicCheck> {
    let z = psi0.overlap(psi_t)?;
    let residual = (1.0 - z.norm()).max(0.0);
    let cyclic = residual < cyclic_tol;
    Ok(CyclicCheck {
        cyclic,
        alpha: if z.norm() > 0.0 { arg_2pi(z) } else { 0.0 },
        residual,
    })
}

/// Decomposes the cyclic geometric phase as
/// `γ(T) = Σ_i p_i (γ_ai + γ_bi + 2π n_i)`.
///
/// `ñ_i` brings `arg⟨μ_i|U_a|μ_i⟩ + arg⟨ν_i|U_b|ν_i⟩` back into `[0, 2π)`;
/// `n_i` is then fixed by
/// `2π n_i = (arg_ai + arg_bi + 2π ñ_i − β_ai − β_bi) − (γ_ai + γ_bi)`
/// and must come out integral. The reported `gamma` is `alpha − beta` with
/// `alpha ∈ [0, 2π)`.
pub fn cyclic_decomposition(
    schmidt: &SchmidtForm,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
    period: usize,
    tol: &Tolerances,
) -> Result<PhaseReport> {
    check_paths(schmidt, path_a, path_b, period)?;
    if !schmidt.non_degenerate() {
        return Err(PhaseError::Degeneracy {
            coefficients: schmidt.coefficients().to_vec(),
            tol: tol.degeneracy_tol,
        });
    }
    let psi0 = schmidt.reassemble();
    let psi_t = psi0.apply_bilocal(path_a.unitary(period), path_b.unitary(period))?;
    let check = detect_cyclic(&psi0, &psi_t, tol.cyclic_tol)?;
    if !check.cyclic {
        return Err(PhaseError::NotCyclic {
            residual: check.residual,
            tol: tol.cyclic_tol,
        });
    }

    let mut components = Vec::with_capacity(schmidt.rank());
    let mut reference: Option<f64> = None;
    let mut beta = 0.0;
    for i in 0..schmidt.rank() {
        let (mu, nu) = (schmidt.mu(i), schmidt.nu(i));
        let za = sandwich(&mu, path_a.unitary(period), &mu);
        let zb = sandwich(&nu, path_b.unitary(period), &nu);
        let joint = za * zb;
        let modulus_gap = (1.0 - joint.norm()).abs();
        let phase = arg_2pi(joint);
        let deviation = match reference {
            None => {
                reference = Some(phase);
                0.0
            }
            Some(r) => circular_distance(phase, r),
        };
        if modulus_gap > CYCLIC_CONSISTENCY_TOL || deviation > CYCLIC_CONSISTENCY_TOL {
            return Err(PhaseError::CyclicConsistency {
                component: i,
                deviation: modulus_gap.max(deviation),
            });
        }

        let (arg_a, arg_b) = (arg_2pi(za), arg_2pi(zb));
        let n_tilde: i64 = if arg_a + arg_b < TAU { 0 } else { -1 };
        let beta_a = path_a.dynamical_phase(&mu, period)?;
        let beta_b = path_b.dynamical_phase(&nu, period)?;
        let gamma_a = wrap_2pi(arg_a - beta_a);
        let gamma_b = wrap_2pi(arg_b - beta_b);
        let raw = (arg_a + arg_b + TAU * n_tilde as f64 - beta_a - beta_b - gamma_a - gamma_b) / TAU;
        let winding = raw.round();
        if (raw - winding).abs() > WINDING_INTEGER_TOL || !raw.is_finite() {
            return Err(PhaseError::NonIntegerWinding { component: i, value: raw });
        }
        let weight = schmidt.coefficients()[i];
        beta += weight * (beta_a + beta_b);
        components.push(ComponentPhases {
            weight,
            arg_a,
            arg_b,
            gamma_a,
            gamma_b,
            beta_a,
            beta_b,
            n_tilde: Some(n_tilde),
            winding: Some(winding as i64),
            winding_raw: Some(raw),
            cyclic_deviation: Some(modulus_gap.max(deviation)),
        });
    }

    let alpha_unwrapped = unwrap_phases(&overlap_history(&psi0, path_a, path_b, period), tol.overlap_tol)
        .ok()
        .map(|a| a[period]);

    Ok(PhaseReport {
        alpha: check.alpha,
        alpha_unwrapped,
        beta,
        gamma: check.alpha - beta,
        cyclic: true,
        cyclic_residual: check.residual,
        components,
    })
}
