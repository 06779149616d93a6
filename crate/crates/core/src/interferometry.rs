//! Two-particle interferometer readout of the phases.
//!
//! Particle `a` passes either a short arm carrying a U(1) shift `χ` or a long
//! arm carrying `U_a(τ)`; particle `b` is left alone. Up to a constant factor
//!
//! * the coincidence intensity is `|e^{iχ}|Ψ(0)⟩ + (U_a ⊗ I)|Ψ(0)⟩|²
//!   = 2 + 2|z| cos(χ − arg z)` with `z = ⟨Ψ(0)|U_a ⊗ I|Ψ(0)⟩`;
//! * the marginal intensity at the `a` detector is
//!   `2 + 2|Tr(ρ_a U_a)| cos(χ − arg Tr(ρ_a U_a))`.
//!
//! Since `Tr(ρ_a U_a) = z`, the two fringes coincide; they differ only in
//! which phase they are read as. The shift is recovered from a uniform
//! `χ` sweep by projecting onto the first Fourier harmonic.

use std::f64::consts::TAU;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::angle::{arg_2pi, wrap_2pi};
use crate::error::{PhaseError, Result};
use crate::tensor::{hermiticity_residual, partial_trace_b, ComplexMatrix, BipartiteState};

/// Fitted visibility below which no phase shift is reported.
pub const DEFAULT_VISIBILITY_FLOOR: f64 = 1e-6;

/// Smallest accepted number of `χ` samples.
pub const MIN_CHI_COUNT: usize = 8;

/// Tolerance on `Tr ρ = 1` and on the Hermiticity of `ρ`.
const DENSITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Coincidence,
    Marginal,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Coincidence => "coincidence",
            Mode::Marginal => "marginal",
        }
    }
}

/// Intensity `2 + 2|z| cos(χ − arg z)` of a fringe with complex amplitude `z`.
pub fn fringe_intensity(z: Complex64, chi: f64) -> f64 {
    // 2 + 2 Re(e^{−iχ} z), clamped against rounding below zero
    (2.0 + 2.0 * (Complex64::from_polar(1.0, -chi) * z).re).max(0.0)
}

/// `⟨Ψ(0)|U_a ⊗ I|Ψ(0)⟩`.
pub fn coincidence_amplitude(psi0: &BipartiteState, u_a_tau: &ComplexMatrix) -> Result<Complex64> {
    psi0.local_a_expectation(u_a_tau)
}

/// `Tr(ρ_a U_a)` for a Hermitian, unit-trace `ρ_a`.
pub fn marginal_amplitude(rho_a0: &ComplexMatrix, u_a_tau: &ComplexMatrix) -> Result<Complex64> {
    if !rho_a0.is_square() || rho_a0.shape() != u_a_tau.shape() {
        return Err(PhaseError::Dimension(format!(
            "ρ_a is {:?} but U_a is {:?}",
            rho_a0.shape(),
            u_a_tau.shape()
        )));
    }
    let trace = rho_a0.trace();
    if (trace - Complex64::new(1.0, 0.0)).norm() > DENSITY_TOL || hermiticity_residual(rho_a0) > DENSITY_TOL {
        return Err(PhaseError::Spec(format!(
            "ρ_a must be Hermitian with unit trace (trace {trace})"
        )));
    }
    Ok((rho_a0 * u_a_tau).trace())
}

pub fn coincidence_intensity(psi0: &BipartiteState, u_a_tau: &ComplexMatrix, chi: f64) -> Result<f64> {
    Ok(fringe_intensity(coincidence_amplitude(psi0, u_a_tau)?, chi))
}

pub fn marginal_intensity(rho_a0: &ComplexMatrix, u_a_tau: &ComplexMatrix, chi: f64) -> Result<f64> {
    Ok(fringe_intensity(marginal_amplitude(rho_a0, u_a_tau)?, chi))
}

/// Additive Gaussian noise on the sampled intensities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    pub sigma: f64,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepOptions {
    pub chi_count: usize,
    pub visibility_floor: f64,
    pub noise: Option<Noise>,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            chi_count: 64,
            visibility_floor: DEFAULT_VISIBILITY_FLOOR,
            noise: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interferogram {
    pub mode: Mode,
    pub chi_samples: Vec<f64>,
    pub intensities: Vec<f64>,
    /// Fitted `φ` of `a + b cos(χ − φ)`, in `[0, 2π)`.
    pub fitted_shift: f64,
    /// Fitted `b / 2`.
    pub fitted_visibility: f64,
    /// Fitted offset `a`; 2 for the noiseless model.
    pub fitted_offset: f64,
    /// Root-mean-square deviation of the samples from the fitted model.
    pub fit_residual: f64,
}

/// Samples the chosen fringe at `χ_j = 2πj/n` and fits `a + b cos(χ − φ)`.
///
/// The marginal fringe uses `ρ_a = Tr_b |Ψ(0)⟩⟨Ψ(0)|`. Noisy samples are
/// clamped at zero.
pub fn sweep_and_fit(
    mode: Mode,
    psi0: &BipartiteState,
    u_a_tau: &ComplexMatrix,
    options: &SweepOptions,
) -> Result<Interferogram> {
    let n = options.chi_count;
    if n < MIN_CHI_COUNT {
        return Err(PhaseError::Spec(format!("chi_count must be at least {MIN_CHI_COUNT}, got {n}")));
    }
    let z = match mode {
        Mode::Coincidence => coincidence_amplitude(psi0, u_a_tau)?,
        Mode::Marginal => {
            let rho_a = partial_trace_b(&psi0.density_matrix(), psi0.dim_a(), psi0.dim_b())?;
            marginal_amplitude(&rho_a, u_a_tau)?
        }
    };
    let chi_samples: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
    let mut intensities: Vec<f64> = chi_samples.iter().map(|&chi| fringe_intensity(z, chi)).collect();
    if let Some(noise) = options.noise {
        let normal = Normal::new(0.0, noise.sigma)
            .map_err(|e| PhaseError::Spec(format!("noise sigma {}: {e}", noise.sigma)))?;
        let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
        for i in intensities.iter_mut() {
            *i = (*i + normal.sample(&mut rng)).max(0.0);
        }
    }
    fit_fringe(mode, chi_samples, intensities, options.visibility_floor)
}

/// First-harmonic quadrature fit of samples taken on a uniform `χ` grid over `[0, 2π)`.
pub fn fit_fringe(
    mode: Mode,
    chi_samples: Vec<f64>,
    intensities: Vec<f64>,
    visibility_floor: f64,
) -> Result<Interferogram> {
    if chi_samples.len() != intensities.len() || chi_samples.len() < MIN_CHI_COUNT {
        return Err(PhaseError::Dimension(format!(
            "{} χ samples and {} intensities",
            chi_samples.len(),
            intensities.len()
        )));
    }
    if intensities.iter().any(|i| !i.is_finite()) {
        return Err(PhaseError::NonFinite("interferogram intensities".into()));
    }
    let n = chi_samples.len() as f64;
    let offset = intensities.iter().sum::<f64>() / n;
    let (mut c, mut s) = (0.0, 0.0);
    for (chi, i) in chi_samples.iter().zip(&intensities) {
        c += i * chi.cos();
        s += i * chi.sin();
    }
    c *= 2.0 / n;
    s *= 2.0 / n;
    let visibility = c.hypot(s) / 2.0;
    if visibility < visibility_floor {
        return Err(PhaseError::ShiftUndefined {
            visibility,
            floor: visibility_floor,
        });
    }
    let shift = wrap_2pi(s.atan2(c));
    let b = 2.0 * visibility;
    let sq: f64 = chi_samples
        .iter()
        .zip(&intensities)
        .map(|(chi, i)| (i - offset - b * (chi - shift).cos()).powi(2))
        .sum();
    Ok(Interferogram {
        mode,
        chi_samples,
        intensities,
        fitted_shift: shift,
        fitted_visibility: visibility,
        fitted_offset: offset,
        fit_residual: (sq / n).sqrt(),
    })
}

/// Analytic fringe parameters `(arg z, |z|)` for the chosen mode.
pub fn analytic_fringe(mode: Mode, psi0: &BipartiteState, u_a_tau: &ComplexMatrix) -> Result<(f64, f64)> {
    let z = match mode {
        Mode::Coincidence => coincidence_amplitude(psi0, u_a_tau)?,
        Mode::Marginal => {
            let rho_a = partial_trace_b(&psi0.density_matrix(), psi0.dim_a(), psi0.dim_b())?;
            marginal_amplitude(&rho_a, u_a_tau)?
        }
    };
    Ok((arg_2pi(z), z.norm()))
}
