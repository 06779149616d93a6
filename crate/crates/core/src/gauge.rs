//! Gauge freedom of evolution operators and parallel transport.
//!
//! Two families of operators reproduce the same state path:
//!
//! * `U(t) e^{iθ(t)}` leaves the pure-state path `|Ψ(t)⟩⟨Ψ(t)|` unchanged
//!   ([`apply_s1`]);
//! * `U(t) Σ_i e^{iθ_i(t)} |μ_i⟩⟨μ_i|` leaves the reduced path
//!   `ρ_a(t) = U ρ_a(0) U†` unchanged ([`apply_s2`]).
//!
//! [`make_parallel_transporting`] picks the member of the second family that
//! satisfies `⟨μ_i|U†U̇|μ_i⟩ = 0` for every `i`.

use num_complex::Complex64;

use crate::angle::{cumulative_trapezoid, unwrap_phases};
use crate::error::{PhaseError, Result};
use crate::evolution::{GeneratorSource, TimeGrid, UnitaryPath};
use crate::tensor::{
    complete_basis, identity, sandwich, unitarity_residual, weighted_projector, ComplexMatrix, SchmidtForm,
};

/// Sampled gauge angles `θ_i(t_k)`; one component for a scalar gauge.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFunction {
    grid: TimeGrid,
    components: Vec<Vec<f64>>,
    /// `θ̇_i(t_k)` when known analytically.
    rates: Option<Vec<Vec<f64>>>,
}

impl GaugeFunction {
    /// Requires `θ_i(0) = 0` exactly and one sample per grid point.
    pub fn from_samples(grid: TimeGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() {
            return Err(PhaseError::Spec("gauge function needs at least one component".into()));
        }
        for (i, c) in components.iter().enumerate() {
            if c.len() != grid.len() {
                return Err(PhaseError::Grid(format!(
                    "gauge component {i} has {} samples for {} grid points",
                    c.len(),
                    grid.len()
                )));
            }
            if c[0] != 0.0 {
                return Err(PhaseError::Spec(format!("gauge component {i} must start at 0, got {}", c[0])));
            }
            if c.iter().any(|x| !x.is_finite()) {
                return Err(PhaseError::NonFinite(format!("gauge component {i}")));
            }
        }
        Ok(Self {
            grid,
            components,
            rates: None,
        })
    }

    /// Vector gauge `θ_i(t) = f(i, t) − f(i, 0)` with analytic rate `θ̇_i(t) = df(i, t)`.
    pub fn smooth(
        grid: TimeGrid,
        n: usize,
        f: impl Fn(usize, f64) -> f64,
        df: impl Fn(usize, f64) -> f64,
    ) -> Result<Self> {
        let mut g = Self::vector(grid, n, f)?;
        let rates: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..grid.len()).map(|k| df(i, grid.time(k))).collect())
            .collect();
        if rates.iter().flatten().any(|x| !x.is_finite()) {
            return Err(PhaseError::NonFinite("gauge rate".into()));
        }
        g.rates = Some(rates);
        Ok(g)
    }

    /// Scalar gauge `θ(t) = f(t)`, with `f(0)` subtracted.
    pub fn scalar(grid: TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::vector(grid, 1, |_, t| f(t))
    }

    /// Vector gauge `θ_i(t) = f(i, t) − f(i, 0)`.
    pub fn vector(grid: TimeGrid, n: usize, f: impl Fn(usize, f64) -> f64) -> Result<Self> {
        let comps = (0..n)
            .map(|i| {
                let f0 = f(i, 0.0);
                (0..grid.len()).map(|k| f(i, grid.time(k)) - f0).collect()
            })
            .collect();
        Self::from_samples(grid, comps)
    }

    /// `θ(t) = rate · t`.
    pub fn linear(grid: TimeGrid, rate: f64) -> Result<Self> {
        Self::smooth(grid, 1, |_, t| rate * t, |_, _| rate)
    }

    /// `θ(t) = amplitude · sin(frequency · t)`.
    pub fn sinusoidal(grid: TimeGrid, amplitude: f64, frequency: f64) -> Result<Self> {
        Self::smooth(
            grid,
            1,
            |_, t| amplitude * (frequency * t).sin(),
            |_, t| amplitude * frequency * (frequency * t).cos(),
        )
    }

    /// Stacks scalar gauges into a vector gauge.
    pub fn stack(parts: &[GaugeFunction]) -> Result<Self> {
        let grid = parts
            .first()
            .ok_or_else(|| PhaseError::Spec("no gauge components".into()))?
            .grid;
        let mut comps = Vec::new();
        let mut rates = Some(Vec::new());
        for p in parts {
            if p.grid != grid {
                return Err(PhaseError::Grid("gauge components on different grids".into()));
            }
            comps.extend(p.components.iter().cloned());
            rates = match (rates, &p.rates) {
                (Some(mut all), Some(r)) => {
                    all.extend(r.iter().cloned());
                    Some(all)
                }
                _ => None,
            };
        }
        let mut g = Self::from_samples(grid, comps)?;
        g.rates = rates;
        Ok(g)
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn component(&self, i: usize) -> &[f64] {
        &self.components[i]
    }

    pub fn value(&self, i: usize, k: usize) -> f64 {
        self.components[i][k]
    }

    /// `θ̇_i(t_k)`: the analytic rate when known, otherwise central
    /// differences with second-order one-sided formulas at the ends.
    pub fn derivative(&self, i: usize) -> Vec<f64> {
        if let Some(rates) = &self.rates {
            return rates[i].clone();
        }
        let c = &self.components[i];
        let n = c.len();
        let dt = self.grid.dt();
        (0..n)
            .map(|k| {
                if k == 0 {
                    (-3.0 * c[0] + 4.0 * c[1] - c[2]) / (2.0 * dt)
                } else if k == n - 1 {
                    (3.0 * c[n - 1] - 4.0 * c[n - 2] + c[n - 3]) / (2.0 * dt)
                } else {
                    (c[k + 1] - c[k - 1]) / (2.0 * dt)
                }
            })
            .collect()
    }
}

fn check_grid(path: &UnitaryPath, theta: &GaugeFunction) -> Result<()> {
    if path.grid() != theta.grid() {
        return Err(PhaseError::Grid(format!(
            "path grid {:?} vs gauge grid {:?}",
            path.grid(),
            theta.grid()
        )));
    }
    Ok(())
}

fn check_basis(basis: &ComplexMatrix, dim: usize) -> Result<()> {
    if basis.nrows() != dim || basis.ncols() == 0 || basis.ncols() > dim {
        return Err(PhaseError::Dimension(format!(
            "basis of shape {:?} for a path of dimension {dim}",
            basis.shape()
        )));
    }
    let r = unitarity_residual(basis);
    if r > 1e-10 {
        return Err(PhaseError::Spec(format!("basis columns not orthonormal (residual {r:.2e})")));
    }
    Ok(())
}

/// `U(t) ↦ U(t) e^{iθ(t)}`; generator becomes `G − θ̇ I`.
pub fn apply_s1(path: &UnitaryPath, theta: &GaugeFunction) -> Result<UnitaryPath> {
    check_grid(path, theta)?;
    if theta.len() != 1 {
        return Err(PhaseError::Spec(format!(
            "scalar gauge expected, got {} components",
            theta.len()
        )));
    }
    let dim = path.dim();
    let rate = theta.derivative(0);
    let generators = path
        .generators()
        .iter()
        .zip(&rate)
        .map(|(g, r)| g - identity(dim) * Complex64::new(*r, 0.0))
        .collect();
    Ok(path.map_samples(
        |k| identity(dim) * Complex64::from_polar(1.0, theta.value(0, k)),
        generators,
        GeneratorSource::FiniteDifference,
    ))
}

/// `U(t) ↦ U(t) Σ_i e^{iθ_i(t)} |μ_i⟩⟨μ_i|`.
///
/// `basis` holds the `|μ_i⟩` as columns, one per gauge component. When it does
/// not span the space, the orthogonal complement is left untouched.
pub fn apply_s2(path: &UnitaryPath, thetas: &GaugeFunction, basis: &ComplexMatrix) -> Result<UnitaryPath> {
    check_grid(path, thetas)?;
    check_basis(basis, path.dim())?;
    if thetas.len() != basis.ncols() {
        return Err(PhaseError::Dimension(format!(
            "{} gauge components for {} basis vectors",
            thetas.len(),
            basis.ncols()
        )));
    }
    let full = complete_basis(basis);
    let dim = path.dim();
    let n = basis.ncols();
    let rates: Vec<Vec<f64>> = (0..n).map(|i| thetas.derivative(i)).collect();
    let diag_factor = |k: usize| -> ComplexMatrix {
        let phases: Vec<Complex64> = (0..dim)
            .map(|i| {
                if i < n {
                    Complex64::from_polar(1.0, thetas.value(i, k))
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        diagonal_in_basis(&full, &phases)
    };
    // G' = G − U (Σ_i θ̇_i |μ_i⟩⟨μ_i|) U†
    let generators = (0..path.grid().len())
        .map(|k| {
            let rate_k: Vec<f64> = (0..n).map(|i| rates[i][k]).collect();
            let p = weighted_projector(basis, &rate_k);
            let u = path.unitary(k);
            path.generator(k) - u * p * u.adjoint()
        })
        .collect();
    Ok(path.map_samples(diag_factor, generators, GeneratorSource::FiniteDifference))
}

/// `Σ_j d_j |b_j⟩⟨b_j|` for the columns of a full basis.
fn diagonal_in_basis(full: &ComplexMatrix, d: &[Complex64]) -> ComplexMatrix {
    let scaled = ComplexMatrix::from_fn(full.nrows(), full.ncols(), |r, c| full[(r, c)] * d[c]);
    scaled * full.adjoint()
}

/// `r_i = max_k |⟨μ_i|U†(t_k) U̇(t_k)|μ_i⟩|` over the columns of `basis`.
pub fn pt_residuals(path: &UnitaryPath, basis: &ComplexMatrix) -> Result<Vec<f64>> {
    check_basis(basis, path.dim())?;
    Ok(basis
        .column_iter()
        .map(|mu| {
            path.energies(&mu.into_owned())
                .into_iter()
                .fold(0.0f64, |m, e| m.max(e.abs()))
        })
        .collect())
}

/// `U(t) = V(t) Σ_i |μ_i⟩⟨μ_i| exp(−∫₀ᵗ ⟨μ_i|V†V̇|μ_i⟩ dt')`.
///
/// The exponent integrals are accumulated with the trapezoid rule along the
/// grid; the output generators are rebuilt from the samples, so
/// [`pt_residuals`] of the result shrinks as `O(Δt²)`. Columns of `basis`
/// that do not span the space are completed and transported as well.
pub fn make_parallel_transporting(v_path: &UnitaryPath, basis: &ComplexMatrix) -> Result<UnitaryPath> {
    check_basis(basis, v_path.dim())?;
    for (k, v) in v_path.unitaries().iter().enumerate() {
        let r = unitarity_residual(v);
        if r > crate::evolution::UNITARITY_TOL {
            return Err(PhaseError::Spec(format!("V sample {k} not unitary (residual {r:.2e})")));
        }
    }
    let full = complete_basis(basis);
    let dt = v_path.grid().dt();
    // ⟨μ|V†V̇|μ⟩ = −i e, so the factor is exp(i ∫ e)
    let accumulated: Vec<Vec<f64>> = full
        .column_iter()
        .map(|mu| cumulative_trapezoid(&v_path.energies(&mu.into_owned()), dt))
        .collect();
    let unitaries: Vec<ComplexMatrix> = (0..v_path.grid().len())
        .map(|k| {
            let phases: Vec<Complex64> = accumulated
                .iter()
                .map(|a| Complex64::from_polar(1.0, a[k]))
                .collect();
            v_path.unitary(k) * diagonal_in_basis(&full, &phases)
        })
        .collect();
    UnitaryPath::from_samples(*v_path.grid(), unitaries)
}

/// Weaker, pure-state parallel transport: `U(t) = V(t) e^{iθ(t)}` with
/// `θ̇ = ⟨Ψ(0)|V†GV ⊗ I_b|Ψ(0)⟩`, so `⟨Ψ(0)|U†U̇ ⊗ I_b|Ψ(0)⟩ = 0` on the grid.
pub fn make_pure_parallel_transporting(v_path: &UnitaryPath, schmidt: &SchmidtForm) -> Result<UnitaryPath> {
    v_path.check_dim(schmidt.dim_a(), "Schmidt basis a")?;
    let dim = v_path.dim();
    let mut mean_energy = vec![0.0; v_path.grid().len()];
    for (i, &p) in schmidt.coefficients().iter().enumerate() {
        for (m, e) in mean_energy.iter_mut().zip(v_path.energies(&schmidt.mu(i))) {
            *m += p * e;
        }
    }
    let theta = cumulative_trapezoid(&mean_energy, v_path.grid().dt());
    let generators = v_path
        .generators()
        .iter()
        .zip(&mean_energy)
        .map(|(g, e)| g - identity(dim) * Complex64::new(*e, 0.0))
        .collect();
    Ok(v_path.map_samples(
        |k| identity(dim) * Complex64::from_polar(1.0, theta[k]),
        generators,
        v_path.generator_source(),
    ))
}

/// Entangled-state phase `γ_a(τ)` that `apply_s2(path, thetas, μ)` should
/// produce, computed from the untransformed path:
/// `arg Σ_i p_i ⟨μ_i|Ũ(τ)|μ_i⟩ e^{iθ_i(τ)} − Σ_i p_i β̃_i(τ) − Σ_i p_i θ_i(τ)`,
/// with the argument followed continuously along the grid.
pub fn s2_predicted_entangled_phase(
    schmidt: &SchmidtForm,
    path: &UnitaryPath,
    thetas: &GaugeFunction,
    tau: usize,
    overlap_tol: f64,
) -> Result<f64> {
    check_grid(path, thetas)?;
    path.check_dim(schmidt.dim_a(), "Schmidt basis a")?;
    path.check_index(tau)?;
    if thetas.len() != schmidt.rank() {
        return Err(PhaseError::Dimension(format!(
            "{} gauge components for {} Schmidt vectors",
            thetas.len(),
            schmidt.rank()
        )));
    }
    let mus: Vec<_> = (0..schmidt.rank()).map(|i| schmidt.mu(i)).collect();
    let p = schmidt.coefficients();
    let overlaps: Vec<Complex64> = (0..=tau)
        .map(|k| {
            mus.iter()
                .enumerate()
                .map(|(i, mu)| p[i] * sandwich(mu, path.unitary(k), mu) * Complex64::from_polar(1.0, thetas.value(i, k)))
                .sum()
        })
        .collect();
    let alpha = unwrap_phases(&overlaps, overlap_tol)?[tau];
    let mut shift = 0.0;
    for (i, mu) in mus.iter().enumerate() {
        shift += p[i] * (path.dynamical_phase(mu, tau)? + thetas.value(i, tau));
    }
    Ok(alpha - shift)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{build_path, EvolutionSpec};
    use crate::mixedstate::reduced_path;
    use crate::sampling::Sampler;
    use crate::tensor::basis_vector;
    use std::f64::consts::TAU;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    fn random_path(s: &mut Sampler, dim: usize, grid: TimeGrid) -> UnitaryPath {
        build_path(&EvolutionSpec::ConstantHamiltonian(s.hermitian(dim, 1.0)), grid).unwrap()
    }

    #[test]
    fn gauge_must_start_at_zero() {
        let grid = TimeGrid::new(1.0, 4).unwrap();
        assert!(GaugeFunction::from_samples(grid, vec![vec![0.1, 0.0, 0.0, 0.0, 0.0]]).is_err());
        let g = GaugeFunction::scalar(grid, |t| 2.0 + t).unwrap();
        assert_eq!(g.value(0, 0), 0.0);
    }

    #[test]
    fn zero_gauges_leave_path_unchanged() {
        let mut s = Sampler::seeded(1);
        let grid = TimeGrid::new(1.0, 32).unwrap();
        let path = random_path(&mut s, 2, grid);
        let zero = GaugeFunction::linear(grid, 0.0).unwrap();
        let p1 = apply_s1(&path, &zero).unwrap();
        let zeros2 = GaugeFunction::vector(grid, 2, |_, _| 0.0).unwrap();
        let p2 = apply_s2(&path, &zeros2, &identity(2)).unwrap();
        for k in 0..grid.len() {
            assert!(max_abs(&(p1.unitary(k) - path.unitary(k))) < 1e-15);
            assert!(max_abs(&(p2.unitary(k) - path.unitary(k))) < 1e-14);
        }
    }

    #[test]
    fn linear_s1_on_identity() {
        let grid = TimeGrid::new(2.0, 16).unwrap();
        let omega = 0.9;
        let p = apply_s1(&UnitaryPath::identity(2, grid), &GaugeFunction::linear(grid, omega).unwrap()).unwrap();
        for k in 0..grid.len() {
            let expected = identity(2) * Complex64::from_polar(1.0, omega * grid.time(k));
            assert!(max_abs(&(p.unitary(k) - expected)) < 1e-14);
            assert!(max_abs(&(p.generator(k) + identity(2) * c(omega, 0.0))) < 1e-12);
        }
    }

    #[test]
    fn s1_keeps_projector_path() {
        let mut s = Sampler::seeded(2);
        let grid = TimeGrid::new(1.5, 40).unwrap();
        let path = random_path(&mut s, 4, grid);
        let psi = s.state(2, 2);
        let theta = GaugeFunction::sinusoidal(grid, 1.3, 2.2).unwrap();
        let gauged = apply_s1(&path, &theta).unwrap();
        for k in 0..grid.len() {
            let a = psi.apply(path.unitary(k)).unwrap().density_matrix();
            let b = psi.apply(gauged.unitary(k)).unwrap().density_matrix();
            assert!(max_abs(&(a - b)) < 1e-10);
        }
    }

    #[test]
    fn equal_s2_components_reduce_to_s1() {
        let mut s = Sampler::seeded(3);
        let grid = TimeGrid::new(1.0, 20).unwrap();
        let path = random_path(&mut s, 3, grid);
        let basis = s.unitary(3);
        let f = |t: f64| 0.7 * t * t;
        let p1 = apply_s1(&path, &GaugeFunction::scalar(grid, f).unwrap()).unwrap();
        let p2 = apply_s2(&path, &GaugeFunction::vector(grid, 3, |_, t| f(t)).unwrap(), &basis).unwrap();
        for k in 0..grid.len() {
            assert!(max_abs(&(p1.unitary(k) - p2.unitary(k))) < 1e-12);
            assert!(max_abs(&(p1.generator(k) - p2.generator(k))) < 1e-9);
        }
    }

    #[test]
    fn s2_keeps_reduced_path_but_not_full_path() {
        let mut s = Sampler::seeded(4);
        let grid = TimeGrid::new(1.0, 30).unwrap();
        let form = s.schmidt_form(&[0.7, 0.3], 2, 2);
        let path = random_path(&mut s, 2, grid);
        let thetas = GaugeFunction::vector(grid, 2, |i, t| (i as f64 + 1.0) * (1.1 * t).sin()).unwrap();
        let gauged = apply_s2(&path, &thetas, form.basis_a()).unwrap();
        let r0 = reduced_path(&form, &path).unwrap();
        let r1 = reduced_path(&form, &gauged).unwrap();
        let psi = form.reassemble();
        let mut max_full: f64 = 0.0;
        for k in 0..grid.len() {
            assert!(max_abs(&(&r0[k] - &r1[k])) < 1e-10);
            let a = psi.apply_bilocal(path.unitary(k), &identity(2)).unwrap().density_matrix();
            let b = psi.apply_bilocal(gauged.unitary(k), &identity(2)).unwrap().density_matrix();
            max_full = max_full.max(max_abs(&(a - b)));
        }
        assert!(max_full > 1e-2);
    }

    #[test]
    fn pt_residuals_identity_and_projector() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let r = pt_residuals(&UnitaryPath::identity(2, grid), &identity(2)).unwrap();
        assert_eq!(r, vec![0.0, 0.0]);
        let omega = 2.5;
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(1, 1)] = c(omega, 0.0);
        let path = build_path(&EvolutionSpec::ConstantHamiltonian(h), grid).unwrap();
        let r = pt_residuals(&path, &identity(2)).unwrap();
        assert!(r[0].abs() < 1e-15);
        assert!((r[1] - omega).abs() < 1e-12);
    }

    #[test]
    fn parallel_transport_of_identity_and_fixed_point() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let id = make_parallel_transporting(&UnitaryPath::identity(2, grid), &identity(2)).unwrap();
        assert!(max_abs(&(id.final_unitary() - identity(2))) < 1e-15);

        let mut s = Sampler::seeded(5);
        let grid = TimeGrid::new(1.0, 1024).unwrap();
        let basis = s.unitary(2);
        let v = random_path(&mut s, 2, grid);
        let once = make_parallel_transporting(&v, &basis).unwrap();
        let twice = make_parallel_transporting(&once, &basis).unwrap();
        for k in 0..grid.len() {
            assert!(max_abs(&(once.unitary(k) - twice.unitary(k))) < 1e-6);
        }
    }

    #[test]
    fn dynamical_evolution_is_gauged_away() {
        let omega = 1.3;
        let grid = TimeGrid::new(TAU / omega * 0.8, 256).unwrap();
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(1, 1)] = c(omega, 0.0);
        let v = build_path(&EvolutionSpec::ConstantHamiltonian(h), grid).unwrap();
        let u = make_parallel_transporting(&v, &identity(2)).unwrap();
        for k in 0..grid.len() {
            assert!(max_abs(&(u.unitary(k) - identity(2))) < 1e-12);
        }
    }

    #[test]
    fn parallel_transport_residuals_shrink_quadratically() {
        let mut s = Sampler::seeded(6);
        let basis = s.unitary(3);
        let h = s.hermitian(3, 1.0);
        let residual = |steps: usize| {
            let grid = TimeGrid::new(1.0, steps).unwrap();
            let v = build_path(&EvolutionSpec::ConstantHamiltonian(h.clone()), grid).unwrap();
            let u = make_parallel_transporting(&v, &basis).unwrap();
            pt_residuals(&u, &basis).unwrap().into_iter().fold(0.0, f64::max)
        };
        let coarse = residual(128);
        let fine = residual(256);
        assert!(coarse / fine > 3.0, "{coarse} vs {fine}");
    }

    #[test]
    fn pure_transport_removes_mean_energy() {
        let mut s = Sampler::seeded(7);
        let grid = TimeGrid::new(1.0, 64).unwrap();
        let form = s.schmidt_form(&[0.6, 0.4], 2, 3);
        let v = random_path(&mut s, 2, grid);
        let u = make_pure_parallel_transporting(&v, &form).unwrap();
        for k in 0..grid.len() {
            let mut mean = 0.0;
            for i in 0..2 {
                mean += form.coefficients()[i] * u.energies(&form.mu(i))[k];
            }
            assert!(mean.abs() < 1e-12);
        }
    }

    #[test]
    fn partial_basis_is_completed() {
        let grid = TimeGrid::new(1.0, 16).unwrap();
        let mut s = Sampler::seeded(8);
        let v = random_path(&mut s, 3, grid);
        let basis = ComplexMatrix::from_columns(&[basis_vector(3, 0), basis_vector(3, 2)]);
        let u = make_parallel_transporting(&v, &basis).unwrap();
        assert!(unitarity_residual(u.final_unitary()) < 1e-12);
        let bad = ComplexMatrix::from_columns(&[basis_vector(3, 0), basis_vector(3, 0)]);
        assert!(make_parallel_transporting(&v, &bad).is_err());
    }

    #[test]
    fn s2_keeps_mixed_phase_and_shifts_entangled_phase_as_predicted() {
        use crate::mixedstate::{entangled_phase_one_sided, mixed_geometric_phase};
        use crate::Tolerances;
        let mut s = Sampler::seeded(6);
        let grid = TimeGrid::new(1.0, 4096).unwrap();
        let form = s.schmidt_form(&[0.6, 0.3, 0.1], 3, 3);
        let path = random_path(&mut s, 3, grid);
        let thetas = GaugeFunction::smooth(
            grid,
            3,
            |i, t| 0.3 * (i as f64 + 1.0) * (0.9 * t).sin(),
            |i, t| 0.27 * (i as f64 + 1.0) * (0.9 * t).cos(),
        )
        .unwrap();
        let gauged = apply_s2(&path, &thetas, form.basis_a()).unwrap();
        let tol = Tolerances::default();
        let before = mixed_geometric_phase(&form, &path, 4096, &tol).unwrap();
        let after = mixed_geometric_phase(&form, &gauged, 4096, &tol).unwrap();
        assert!(crate::angle::circular_distance(before, after) < 1e-8);
        let entangled = entangled_phase_one_sided(&form, &gauged, 4096, &tol).unwrap();
        let predicted = s2_predicted_entangled_phase(&form, &path, &thetas, 4096, 1e-10).unwrap();
        assert!((entangled - predicted).abs() < 1e-8);
        let untouched = entangled_phase_one_sided(&form, &path, 4096, &tol).unwrap();
        assert!((entangled - untouched).abs() > 1e-4, "{entangled} vs {untouched}");
    }

    #[test]
    fn analytic_rates_are_used() {
        let grid = TimeGrid::new(1.0, 8).unwrap();
        let g = GaugeFunction::sinusoidal(grid, 2.0, 3.0).unwrap();
        let d = g.derivative(0);
        for (k, dk) in d.iter().enumerate() {
            assert_eq!(*dk, 6.0 * (3.0 * grid.time(k)).cos());
        }
        let fd = GaugeFunction::scalar(grid, |t| 2.0 * (3.0 * t).sin()).unwrap().derivative(0);
        assert!((fd[4] - d[4]).abs() > 1e-6);
        let stacked = GaugeFunction::stack(&[g.clone(), GaugeFunction::linear(grid, 1.0).unwrap()]).unwrap();
        assert_eq!(stacked.derivative(1), vec![1.0; grid.len()]);
    }
}
