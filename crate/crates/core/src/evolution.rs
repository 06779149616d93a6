//! Unitary trajectories on a uniform time grid.
//!
//! Generators are angular-frequency matrices `G` with `U̇ = −i G U`. A path
//! always carries one generator per sample: either the analytic one (constant
//! and piecewise-constant Hamiltonians) or one reconstructed from the samples
//! by finite differences.

use num_complex::Complex64;

use crate::angle::cumulative_trapezoid;
use crate::error::{PhaseError, Result};
use crate::tensor::{
    hermiticity_residual, identity, is_finite, kron, unitarity_residual, BipartiteState,
    ComplexMatrix, ComplexVector,
};

pub const DEFAULT_STEPS: usize = 4096;

/// Hermiticity residual accepted for generator payloads.
pub const HERMITICITY_TOL: f64 = 1e-10;

/// Unitarity residual accepted for unitary samples.
pub const UNITARITY_TOL: f64 = 1e-8;

/// Uniform grid `t_k = k · t_final / steps`, `k = 0..=steps`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    t_final: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(t_final: f64, steps: usize) -> Result<Self> {
        if !(t_final.is_finite() && t_final > 0.0) {
            return Err(PhaseError::Grid(format!("t_final must be positive, got {t_final}")));
        }
        if steps < 2 {
            return Err(PhaseError::Grid(format!("need at least 2 steps, got {steps}")));
        }
        Ok(Self { t_final, steps })
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.t_final / self.steps as f64
    }

    /// Number of samples, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn last_index(&self) -> usize {
        self.steps
    }

    /// Same grid with twice the number of steps.
    pub fn refined(&self) -> Self {
        Self {
            t_final: self.t_final,
            steps: 2 * self.steps,
        }
    }

    fn check_index(&self, k: usize) -> Result<()> {
        if k > self.steps {
            return Err(PhaseError::Grid(format!(
                "index {k} beyond last grid index {}",
                self.steps
            )));
        }
        Ok(())
    }

    fn check_same(&self, other: &TimeGrid) -> Result<()> {
        if self.steps != other.steps || (self.t_final - other.t_final).abs() > 1e-14 * self.t_final {
            return Err(PhaseError::Grid(format!(
                "({}, {} steps) vs ({}, {} steps)",
                self.t_final, self.steps, other.t_final, other.steps
            )));
        }
        Ok(())
    }
}

/// How an evolution is specified.
#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionSpec {
    /// `U(t) = exp(−i H t)`.
    ConstantHamiltonian(ComplexMatrix),
    /// Consecutive `(duration, H)` segments starting at `t = 0`.
    PiecewiseConstant(Vec<(f64, ComplexMatrix)>),
    /// Explicit `U(t_k)` for every grid point.
    SampledUnitaries(Vec<ComplexMatrix>),
    /// `V(t)` turned into an operator that parallel transports every column of `basis`.
    ParallelTransported {
        v: Box<EvolutionSpec>,
        basis: ComplexMatrix,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GeneratorSource {
    Analytic,
    FiniteDifference,
}

/// Sampled unitary trajectory with `U(t_0) = I`.
#[derive(Debug, Clone)]
pub struct UnitaryPath {
    grid: TimeGrid,
    unitaries: Vec<ComplexMatrix>,
    generators: Vec<ComplexMatrix>,
    source: GeneratorSource,
}

impl UnitaryPath {
    /// Constant identity path.
    pub fn identity(dim: usize, grid: TimeGrid) -> Self {
        Self {
            grid,
            unitaries: vec![identity(dim); grid.len()],
            generators: vec![ComplexMatrix::zeros(dim, dim); grid.len()],
            source: GeneratorSource::Analytic,
        }
    }

    /// Path from samples and their known generators.
    pub fn with_generators(
        grid: TimeGrid,
        unitaries: Vec<ComplexMatrix>,
        generators: Vec<ComplexMatrix>,
    ) -> Result<Self> {
        let mut path = Self::checked_samples(grid, unitaries)?;
        if generators.len() != grid.len() {
            return Err(PhaseError::Spec(format!(
                "{} generators for {} grid points",
                generators.len(),
                grid.len()
            )));
        }
        let dim = path.dim();
        for (k, g) in generators.iter().enumerate() {
            if g.shape() != (dim, dim) || !is_finite(g) {
                return Err(PhaseError::Spec(format!("generator {k} malformed")));
            }
        }
        path.generators = generators;
        path.source = GeneratorSource::Analytic;
        Ok(path)
    }

    /// Path from samples alone; generators are rebuilt from central differences
    /// (second-order one-sided at the two ends), so their error is `O(Δt²)`.
    pub fn from_samples(grid: TimeGrid, unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        let mut path = Self::checked_samples(grid, unitaries)?;
        path.generators = finite_difference_generators(&path.unitaries, grid.dt());
        path.source = GeneratorSource::FiniteDifference;
        Ok(path)
    }

    fn checked_samples(grid: TimeGrid, mut unitaries: Vec<ComplexMatrix>) -> Result<Self> {
        if unitaries.len() != grid.len() {
            return Err(PhaseError::Spec(format!(
                "{} unitary samples for {} grid points",
                unitaries.len(),
                grid.len()
            )));
        }
        let dim = unitaries[0].nrows();
        for (k, u) in unitaries.iter().enumerate() {
            if u.shape() != (dim, dim) {
                return Err(PhaseError::Spec(format!("sample {k} has shape {:?}", u.shape())));
            }
            if !is_finite(u) {
                return Err(PhaseError::NonFinite(format!("unitary sample {k}")));
            }
            let r = unitarity_residual(u);
            if r > UNITARITY_TOL {
                return Err(PhaseError::Spec(format!("sample {k} not unitary (residual {r:.2e})")));
            }
        }
        let r0 = (&unitaries[0] - identity(dim)).iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if r0 > UNITARITY_TOL {
            return Err(PhaseError::Spec(format!("first sample must be the identity (off by {r0:.2e})")));
        }
        unitaries[0] = identity(dim);
        Ok(Self {
            grid,
            unitaries,
            generators: Vec::new(),
            source: GeneratorSource::FiniteDifference,
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    pub fn dim(&self) -> usize {
        self.unitaries[0].nrows()
    }

    pub fn unitary(&self, k: usize) -> &ComplexMatrix {
        &self.unitaries[k]
    }

    pub fn unitaries(&self) -> &[ComplexMatrix] {
        &self.unitaries
    }

    pub fn generator(&self, k: usize) -> &ComplexMatrix {
        &self.generators[k]
    }

    pub fn generators(&self) -> &[ComplexMatrix] {
        &self.generators
    }

    pub fn generator_source(&self) -> GeneratorSource {
        self.source
    }

    pub fn final_unitary(&self) -> &ComplexMatrix {
        &self.unitaries[self.grid.last_index()]
    }

    pub(crate) fn check_index(&self, k: usize) -> Result<()> {
        self.grid.check_index(k)
    }

    pub(crate) fn check_same_grid(&self, other: &UnitaryPath) -> Result<()> {
        self.grid.check_same(&other.grid)
    }

    pub(crate) fn check_dim(&self, dim: usize, what: &str) -> Result<()> {
        if self.dim() != dim {
            return Err(PhaseError::Dimension(format!(
                "path acts on dimension {}, {what} has dimension {dim}",
                self.dim()
            )));
        }
        Ok(())
    }

    /// `e(t_k) = ⟨U_k v|G_k|U_k v⟩`, so that `⟨v|U†U̇|v⟩ = −i e`.
    pub fn energies(&self, v: &ComplexVector) -> Vec<f64> {
        self.unitaries
            .iter()
            .zip(&self.generators)
            .map(|(u, g)| {
                let w = u * v;
                w.dotc(&(g * &w)).re
            })
            .collect()
    }

    /// Cumulative dynamical phase `β_v(t_k) = Im ∫₀^{t_k} ⟨v|U†U̇|v⟩ dt = −∫ e dt`
    /// (trapezoid rule).
    pub fn cumulative_dynamical_phase(&self, v: &ComplexVector) -> Vec<f64> {
        let e = self.energies(v);
        cumulative_trapezoid(&e, self.grid.dt())
            .into_iter()
            .map(|x| -x)
            .collect()
    }

    /// `β_v(t_k)` for a single index.
    pub fn dynamical_phase(&self, v: &ComplexVector, k: usize) -> Result<f64> {
        self.check_index(k)?;
        let e = self.energies(v);
        Ok(-cumulative_trapezoid(&e[..=k], self.grid.dt())[k])
    }

    /// Path with samples right-multiplied by `factors[k]` and the supplied generators.
    pub(crate) fn map_samples(
        &self,
        factors: impl Fn(usize) -> ComplexMatrix,
        generators: Vec<ComplexMatrix>,
        source: GeneratorSource,
    ) -> Self {
        let unitaries = (0..self.grid.len())
            .map(|k| &self.unitaries[k] * factors(k))
            .collect();
        Self {
            grid: self.grid,
            unitaries,
            generators,
            source,
        }
    }
}

/// `G_k = i U̇_k U_k†` from central differences, Hermitian part kept.
pub(crate) fn finite_difference_generators(u: &[ComplexMatrix], dt: f64) -> Vec<ComplexMatrix> {
    let n = u.len();
    let i_unit = Complex64::new(0.0, 1.0);
    (0..n)
        .map(|k| {
            let du = if k == 0 {
                (&u[1] * Complex64::new(4.0, 0.0) - &u[0] * Complex64::new(3.0, 0.0) - &u[2]) / Complex64::new(2.0 * dt, 0.0)
            } else if k == n - 1 {
                (&u[n - 1] * Complex64::new(3.0, 0.0) - &u[n - 2] * Complex64::new(4.0, 0.0) + &u[n - 3]) / Complex64::new(2.0 * dt, 0.0)
            } else {
                (&u[k + 1] - &u[k - 1]) / Complex64::new(2.0 * dt, 0.0)
            };
            let g = du * u[k].adjoint() * i_unit;
            (&g + g.adjoint()) * Complex64::new(0.5, 0.0)
        })
        .collect()
}

/// Spectral form of a Hermitian generator; evaluates `exp(−i H t)` exactly per `t`.
#[derive(Debug, Clone)]
pub struct HermitianPropagator {
    vectors: ComplexMatrix,
    values: Vec<f64>,
}

impl HermitianPropagator {
    pub fn new(h: &ComplexMatrix) -> Result<Self> {
        if h.nrows() != h.ncols() || h.nrows() == 0 {
            return Err(PhaseError::Spec(format!("generator must be square, got {:?}", h.shape())));
        }
        if !is_finite(h) {
            return Err(PhaseError::NonFinite("generator".into()));
        }
        let r = hermiticity_residual(h);
        if r > HERMITICITY_TOL {
            return Err(PhaseError::Spec(format!("generator not Hermitian (residual {r:.2e})")));
        }
        let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
        let eig = herm.symmetric_eigen();
        Ok(Self {
            vectors: eig.eigenvectors,
            values: eig.eigenvalues.iter().copied().collect(),
        })
    }

    /// `exp(−i H t)`.
    pub fn at(&self, t: f64) -> ComplexMatrix {
        let phases = ComplexVector::from_iterator(
            self.values.len(),
            self.values.iter().map(|e| Complex64::from_polar(1.0, -e * t)),
        );
        let scaled = ComplexMatrix::from_fn(self.vectors.nrows(), self.vectors.ncols(), |i, j| {
            self.vectors[(i, j)] * phases[j]
        });
        scaled * self.vectors.adjoint()
    }
}

/// `exp(−i H t)` for Hermitian `H`.
pub fn propagator(h: &ComplexMatrix, t: f64) -> Result<ComplexMatrix> {
    Ok(HermitianPropagator::new(h)?.at(t))
}

/// Samples an evolution specification on `grid`.
pub fn build_path(spec: &EvolutionSpec, grid: TimeGrid) -> Result<UnitaryPath> {
    match spec {
        EvolutionSpec::ConstantHamiltonian(h) => {
            let prop = HermitianPropagator::new(h)?;
            let unitaries = (0..grid.len()).map(|k| prop.at(grid.time(k))).collect();
            let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
            UnitaryPath::with_generators(grid, unitaries, vec![herm; grid.len()])
        }
        EvolutionSpec::PiecewiseConstant(segments) => build_piecewise(segments, grid),
        EvolutionSpec::SampledUnitaries(samples) => UnitaryPath::from_samples(grid, samples.clone()),
        EvolutionSpec::ParallelTransported { v, basis } => {
            let v_path = build_path(v, grid)?;
            crate::gauge::make_parallel_transporting(&v_path, basis)
        }
    }
}

fn build_piecewise(segments: &[(f64, ComplexMatrix)], grid: TimeGrid) -> Result<UnitaryPath> {
    if segments.is_empty() {
        return Err(PhaseError::Spec("piecewise evolution needs at least one segment".into()));
    }
    let dim = segments[0].1.nrows();
    let mut starts = Vec::with_capacity(segments.len());
    let mut props = Vec::with_capacity(segments.len());
    let mut t = 0.0;
    for (j, (dur, h)) in segments.iter().enumerate() {
        if !(dur.is_finite() && *dur > 0.0) {
            return Err(PhaseError::Spec(format!("segment {j} has non-positive duration {dur}")));
        }
        if h.shape() != (dim, dim) {
            return Err(PhaseError::Spec(format!("segment {j} generator has shape {:?}", h.shape())));
        }
        props.push(HermitianPropagator::new(h)?);
        starts.push(t);
        t += dur;
    }
    if t < grid.t_final() * (1.0 - 1e-12) {
        return Err(PhaseError::Spec(format!(
            "segments cover {t} but the grid runs to {}",
            grid.t_final()
        )));
    }
    // U at each segment start
    let mut anchors = vec![identity(dim)];
    for j in 0..segments.len() - 1 {
        let next = props[j].at(segments[j].0) * &anchors[j];
        anchors.push(next);
    }
    let mut unitaries = Vec::with_capacity(grid.len());
    let mut generators = Vec::with_capacity(grid.len());
    for k in 0..grid.len() {
        let tk = grid.time(k);
        // right-continuous: a sample on a breakpoint belongs to the later segment
        let j = starts
            .iter()
            .rposition(|s| *s <= tk)
            .unwrap_or(0);
        unitaries.push(props[j].at(tk - starts[j]) * &anchors[j]);
        let h = &segments[j].1;
        generators.push((h + h.adjoint()) * Complex64::new(0.5, 0.0));
    }
    UnitaryPath::with_generators(grid, unitaries, generators)
}

/// `U_k = U_a,k ⊗ U_b,k` with generator `G_a ⊗ I + I ⊗ G_b`.
pub fn compose_bilocal(path_a: &UnitaryPath, path_b: &UnitaryPath) -> Result<UnitaryPath> {
    path_a.check_same_grid(path_b)?;
    let (da, db) = (path_a.dim(), path_b.dim());
    let (ia, ib) = (identity(da), identity(db));
    let unitaries = path_a
        .unitaries
        .iter()
        .zip(&path_b.unitaries)
        .map(|(a, b)| kron(a, b))
        .collect();
    let generators = path_a
        .generators
        .iter()
        .zip(&path_b.generators)
        .map(|(ga, gb)| kron(ga, &ib) + kron(&ia, gb))
        .collect();
    let source = if path_a.source == GeneratorSource::Analytic && path_b.source == GeneratorSource::Analytic {
        GeneratorSource::Analytic
    } else {
        GeneratorSource::FiniteDifference
    };
    Ok(UnitaryPath {
        grid: path_a.grid,
        unitaries,
        generators,
        source,
    })
}

/// `ψ_k = U_k ψ_0` for a path acting on the full space.
pub fn evolve_state(psi0: &BipartiteState, path: &UnitaryPath) -> Result<Vec<BipartiteState>> {
    path.check_dim(psi0.dim_a() * psi0.dim_b(), "state")?;
    path.unitaries.iter().map(|u| renormalize(psi0.apply(u)?)).collect()
}

/// `ψ_k = (U_a,k ⊗ U_b,k) ψ_0` without forming the Kronecker product.
pub fn evolve_bilocal(
    psi0: &BipartiteState,
    path_a: &UnitaryPath,
    path_b: &UnitaryPath,
) -> Result<Vec<BipartiteState>> {
    path_a.check_same_grid(path_b)?;
    path_a.check_dim(psi0.dim_a(), "subsystem a")?;
    path_b.check_dim(psi0.dim_b(), "subsystem b")?;
    path_a
        .unitaries
        .iter()
        .zip(&path_b.unitaries)
        .map(|(a, b)| renormalize(psi0.apply_bilocal(a, b)?))
        .collect()
}

/// Checks the norm survived the unitary (within 1e-10) and wraps the result.
fn renormalize(psi: BipartiteState) -> Result<BipartiteState> {
    let norm_sqr = psi.amplitudes().norm_squared();
    if !norm_sqr.is_finite() {
        return Err(PhaseError::NonFinite("evolved state".into()));
    }
    if (norm_sqr - 1.0).abs() > 1e-10 {
        return Err(PhaseError::Normalization { norm_sqr });
    }
    BipartiteState::normalized(psi.dim_a(), psi.dim_b(), psi.amplitudes().clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Sampler;
    use std::f64::consts::{PI, TAU};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn max_abs(m: &ComplexMatrix) -> f64 {
        m.iter().fold(0.0, |a, z| a.max(z.norm()))
    }

    fn proj1() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)])
    }

    /// Scaling-and-squaring Taylor exponential, independent of the eigen route.
    fn expm_oracle(a: &ComplexMatrix) -> ComplexMatrix {
        let norm = a.iter().map(|z| z.norm()).sum::<f64>();
        let s = (norm.max(1.0).log2().ceil() as i32 + 4).max(0) as u32;
        let scaled = a / Complex64::new(2f64.powi(s as i32), 0.0);
        let n = a.nrows();
        let mut term = identity(n);
        let mut sum = identity(n);
        for j in 1..30 {
            term = &term * &scaled / Complex64::new(j as f64, 0.0);
            sum += &term;
        }
        for _ in 0..s {
            sum = &sum * &sum;
        }
        sum
    }

    #[test]
    fn zero_hamiltonian_gives_identity() {
        let grid = TimeGrid::new(3.0, 16).unwrap();
        let path = build_path(&EvolutionSpec::ConstantHamiltonian(ComplexMatrix::zeros(3, 3)), grid).unwrap();
        for u in path.unitaries() {
            assert!(max_abs(&(u - identity(3))) < 1e-15);
        }
    }

    #[test]
    fn projector_hamiltonian_returns_after_period() {
        let omega = 1.7;
        let grid = TimeGrid::new(TAU / omega, 64).unwrap();
        let h = proj1() * c(omega, 0.0);
        let path = build_path(&EvolutionSpec::ConstantHamiltonian(h), grid).unwrap();
        assert!(max_abs(&(path.final_unitary() - identity(2))) < 1e-12);
    }

    #[test]
    fn sigma_x_half_turn_matches_oracle() {
        let sx = ComplexMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let h = &sx * c(PI / 2.0, 0.0);
        let u = propagator(&h, 1.0).unwrap();
        let expected = &sx * c(0.0, -1.0);
        assert!(max_abs(&(&u - &expected)) < 1e-14);
        let oracle = expm_oracle(&(&h * c(0.0, -1.0)));
        assert!(max_abs(&(&u - &oracle)) < 1e-12);
    }

    #[test]
    fn random_propagator_matches_oracle() {
        let mut s = Sampler::seeded(2);
        for n in 2..5 {
            let h = s.hermitian(n, 3.0);
            let t = s.uniform(0.1, 2.0);
            let u = propagator(&h, t).unwrap();
            let oracle = expm_oracle(&(&h * c(0.0, -t)));
            assert!(max_abs(&(u - oracle)) < 1e-11);
        }
    }

    #[test]
    fn constant_path_steps_by_exact_propagator() {
        let mut s = Sampler::seeded(4);
        let h = s.hermitian(3, 2.0);
        let grid = TimeGrid::new(2.0, 50).unwrap();
        let path = build_path(&EvolutionSpec::ConstantHamiltonian(h.clone()), grid).unwrap();
        let step = propagator(&h, grid.dt()).unwrap();
        for k in 0..grid.steps() {
            assert!(max_abs(&(path.unitary(k + 1) - &step * path.unitary(k))) < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_generator_rejected() {
        let mut h = ComplexMatrix::zeros(2, 2);
        h[(0, 1)] = c(1.0, 0.0);
        let grid = TimeGrid::new(1.0, 4).unwrap();
        assert!(matches!(
            build_path(&EvolutionSpec::ConstantHamiltonian(h), grid),
            Err(PhaseError::Spec(_))
        ));
    }

    #[test]
    fn non_unitary_sample_rejected() {
        let grid = TimeGrid::new(1.0, 2).unwrap();
        let samples = vec![identity(2), identity(2) * c(1.1, 0.0), identity(2)];
        assert!(matches!(
            build_path(&EvolutionSpec::SampledUnitaries(samples), grid),
            Err(PhaseError::Spec(_))
        ));
    }

    #[test]
    fn sampled_path_recovers_generator() {
        let mut s = Sampler::seeded(6);
        let h = s.hermitian(2, 1.0);
        let grid = TimeGrid::new(1.0, 512).unwrap();
        let exact = build_path(&EvolutionSpec::ConstantHamiltonian(h.clone()), grid).unwrap();
        let sampled = build_path(&EvolutionSpec::SampledUnitaries(exact.unitaries().to_vec()), grid).unwrap();
        assert_eq!(sampled.generator_source(), GeneratorSource::FiniteDifference);
        for g in sampled.generators() {
            assert!(max_abs(&(g - &h)) < 1e-5);
        }
    }

    #[test]
    fn piecewise_matches_product_of_exponentials() {
        let mut s = Sampler::seeded(7);
        let h1 = s.hermitian(2, 1.0);
        let h2 = s.hermitian(2, 1.0);
        let grid = TimeGrid::new(2.0, 8).unwrap();
        let spec = EvolutionSpec::PiecewiseConstant(vec![(0.75, h1.clone()), (1.25, h2.clone())]);
        let path = build_path(&spec, grid).unwrap();
        let expected = propagator(&h2, 1.25).unwrap() * propagator(&h1, 0.75).unwrap();
        assert!(max_abs(&(path.final_unitary() - expected)) < 1e-12);
        let short = EvolutionSpec::PiecewiseConstant(vec![(0.5, h1)]);
        assert!(build_path(&short, grid).is_err());
    }

    #[test]
    fn compose_with_identity_and_grid_mismatch() {
        let mut s = Sampler::seeded(10);
        let grid = TimeGrid::new(1.0, 10).unwrap();
        let pa = build_path(&EvolutionSpec::ConstantHamiltonian(s.hermitian(2, 1.0)), grid).unwrap();
        let pb = UnitaryPath::identity(3, grid);
        let both = compose_bilocal(&pa, &pb).unwrap();
        for k in 0..grid.len() {
            assert!(max_abs(&(both.unitary(k) - kron(pa.unitary(k), &identity(3)))) < 1e-15);
        }
        let idp = compose_bilocal(&UnitaryPath::identity(2, grid), &pb).unwrap();
        assert!(max_abs(&(idp.final_unitary() - identity(6))) < 1e-15);
        let other = UnitaryPath::identity(3, TimeGrid::new(1.0, 12).unwrap());
        assert!(matches!(compose_bilocal(&pa, &other), Err(PhaseError::Grid(_))));
    }

    #[test]
    fn bilocal_evolution_matches_schmidt_components() {
        let mut s = Sampler::seeded(12);
        let grid = TimeGrid::new(1.3, 20).unwrap();
        let pa = build_path(&EvolutionSpec::ConstantHamiltonian(s.hermitian(2, 1.5)), grid).unwrap();
        let pb = build_path(&EvolutionSpec::ConstantHamiltonian(s.hermitian(2, 0.7)), grid).unwrap();
        let form = s.schmidt_form(&[0.8, 0.2], 2, 2);
        let psi0 = form.reassemble();
        let full = evolve_state(&psi0, &compose_bilocal(&pa, &pb).unwrap()).unwrap();
        let local = evolve_bilocal(&psi0, &pa, &pb).unwrap();
        for k in 0..grid.len() {
            // Σ √p_i U_a μ_i ⊗ U_b ν_i
            let mut amps = ComplexVector::zeros(4);
            for i in 0..2 {
                let mu = pa.unitary(k) * form.mu(i);
                let nu = pb.unitary(k) * form.nu(i);
                for x in 0..2 {
                    for y in 0..2 {
                        amps[x * 2 + y] += mu[x] * nu[y] * form.coefficients()[i].sqrt();
                    }
                }
            }
            assert!((full[k].amplitudes() - &amps).norm() < 1e-10);
            assert!((local[k].amplitudes() - &amps).norm() < 1e-10);
        }
    }

    #[test]
    fn half_period_flips_excited_component() {
        let omega = 2.0;
        let grid = TimeGrid::new(PI / omega, 10).unwrap();
        let pa = build_path(&EvolutionSpec::ConstantHamiltonian(proj1() * c(omega, 0.0)), grid).unwrap();
        let pb = UnitaryPath::identity(2, grid);
        let out = evolve_bilocal(&qubit_pair(0.25), &pa, &pb).unwrap();
        let last = out.last().unwrap().amplitudes();
        assert!((last[3] - c(-0.5, 0.0)).norm() < 1e-12);
        assert!((last[0] - c(0.75f64.sqrt(), 0.0)).norm() < 1e-12);
    }

    #[test]
    fn evolution_preserves_norm() {
        let mut s = Sampler::seeded(13);
        let grid = TimeGrid::new(3.0, 100).unwrap();
        let path = build_path(&EvolutionSpec::ConstantHamiltonian(s.hermitian(6, 4.0)), grid).unwrap();
        let psi = s.state(2, 3);
        for st in evolve_state(&psi, &path).unwrap() {
            assert!((st.amplitudes().norm_squared() - 1.0).abs() < 1e-10);
        }
        let identity_path = UnitaryPath::identity(6, grid);
        for st in evolve_state(&psi, &identity_path).unwrap() {
            assert_eq!(st, psi);
        }
        assert!(matches!(
            evolve_state(&s.state(2, 2), &path),
            Err(PhaseError::Dimension(_))
        ));
    }

    fn qubit_pair(p1: f64) -> BipartiteState {
        let amps = ComplexVector::from_vec(vec![
            c((1.0 - p1).sqrt(), 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
            c(p1.sqrt(), 0.0),
        ]);
        BipartiteState::new(2, 2, amps).unwrap()
    }
}
