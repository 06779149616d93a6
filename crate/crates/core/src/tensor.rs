//! Dense complex linear algebra for two-party systems.
//!
//! Index convention: a product basis vector `|i⟩_a ⊗ |j⟩_b` sits at position
//! `i * dim_b + j`, so the second subsystem index varies fastest. [`kron`]
//! and [`partial_trace_b`] both follow it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{PhaseError, Result};

pub type ComplexMatrix = DMatrix<Complex64>;
pub type ComplexVector = DVector<Complex64>;

/// Maximum deviation of the squared norm from 1 accepted by [`BipartiteState::new`].
pub const NORM_TOL: f64 = 1e-12;

/// Default tolerance for declaring two Schmidt coefficients equal.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-9;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Kronecker product `a ⊗ b`.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

/// `Tr_b ρ` for a `(dim_a·dim_b)`-square operator.
pub fn partial_trace_b(rho: &ComplexMatrix, dim_a: usize, dim_b: usize) -> Result<ComplexMatrix> {
    let n = dim_a * dim_b;
    if rho.nrows() != n || rho.ncols() != n {
        return Err(PhaseError::Dimension(format!(
            "partial trace expects {n}x{n}, got {}x{}",
            rho.nrows(),
            rho.ncols()
        )));
    }
    Ok(ComplexMatrix::from_fn(dim_a, dim_a, |i, k| {
        (0..dim_b).map(|j| rho[(i * dim_b + j, k * dim_b + j)]).sum()
    }))
}

/// Max-norm of `U†U − I`.
pub fn unitarity_residual(u: &ComplexMatrix) -> f64 {
    let n = u.ncols();
    let g = u.adjoint() * u;
    let mut r: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let id = if i == j { 1.0 } else { 0.0 };
            r = r.max((g[(i, j)] - Complex64::new(id, 0.0)).norm());
        }
    }
    r
}

/// Max-norm of `H − H†`.
pub fn hermiticity_residual(h: &ComplexMatrix) -> f64 {
    (h - h.adjoint()).iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `⟨u|M|v⟩`.
pub fn sandwich(u: &ComplexVector, m: &ComplexMatrix, v: &ComplexVector) -> Complex64 {
    u.dotc(&(m * v))
}

/// Projector `Σ_i w_i |b_i⟩⟨b_i|` over the columns of `basis`.
pub fn weighted_projector(basis: &ComplexMatrix, weights: &[f64]) -> ComplexMatrix {
    let n = basis.nrows();
    let mut out = ComplexMatrix::zeros(n, n);
    for (i, &w) in weights.iter().enumerate() {
        let col = basis.column(i);
        out += col * col.adjoint() * Complex64::new(w, 0.0);
    }
    out
}

/// Extends orthonormal columns to a full orthonormal basis.
///
/// The first `basis.ncols()` columns of the result are the input columns;
/// the rest are Gram-Schmidt completions drawn from the standard basis.
pub fn complete_basis(basis: &ComplexMatrix) -> ComplexMatrix {
    let n = basis.nrows();
    let mut cols: Vec<ComplexVector> = basis.column_iter().map(|c| c.into_owned()).collect();
    while cols.len() < n {
        let mut best: Option<ComplexVector> = None;
        let mut best_norm = 0.0;
        for e in 0..n {
            let mut v = ComplexVector::zeros(n);
            v[e] = Complex64::new(1.0, 0.0);
            for _ in 0..2 {
                for c in &cols {
                    let proj = c.dotc(&v);
                    v -= c * proj;
                }
            }
            let norm = v.norm();
            if norm > best_norm {
                best_norm = norm;
                best = Some(v);
            }
        }
        let v = best.expect("complement exists while cols < n");
        cols.push(v.unscale(best_norm));
    }
    ComplexMatrix::from_columns(&cols)
}

/// Normalized pure state of a two-party system.
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    amplitudes: ComplexVector,
}

impl BipartiteState {
    /// Wraps amplitudes (second index fastest), requiring unit norm within [`NORM_TOL`].
    pub fn new(dim_a: usize, dim_b: usize, amplitudes: ComplexVector) -> Result<Self> {
        if dim_a == 0 || dim_b == 0 || amplitudes.len() != dim_a * dim_b {
            return Err(PhaseError::Dimension(format!(
                "state of dims ({dim_a}, {dim_b}) needs {} amplitudes, got {}",
                dim_a * dim_b,
                amplitudes.len()
            )));
        }
        if !amplitudes.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(PhaseError::NonFinite("state amplitudes".into()));
        }
        let norm_sqr = amplitudes.norm_squared();
        if (norm_sqr - 1.0).abs() > NORM_TOL {
            return Err(PhaseError::Normalization { norm_sqr });
        }
        Ok(Self {
            dim_a,
            dim_b,
            amplitudes,
        })
    }

    /// Like [`BipartiteState::new`] but rescales any nonzero vector to unit norm.
    pub fn normalized(dim_a: usize, dim_b: usize, amplitudes: ComplexVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(PhaseError::Normalization {
                norm_sqr: norm * norm,
            });
        }
        Self::new(dim_a, dim_b, amplitudes.unscale(norm))
    }

    pub fn product(a: &ComplexVector, b: &ComplexVector) -> Result<Self> {
        let amps = ComplexVector::from_fn(a.len() * b.len(), |k, _| {
            a[k / b.len()] * b[k % b.len()]
        });
        Self::normalized(a.len(), b.len(), amps)
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn amplitudes(&self) -> &ComplexVector {
        &self.amplitudes
    }

    /// Amplitudes reshaped to a `dim_a × dim_b` matrix `M[i, j] = ψ[i·dim_b + j]`.
    pub fn amplitude_matrix(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.dim_a, self.dim_b, |i, j| {
            self.amplitudes[i * self.dim_b + j]
        })
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &BipartiteState) -> Result<Complex64> {
        self.check_same_dims(other)?;
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// `|ψ⟩⟨ψ|`.
    pub fn density_matrix(&self) -> ComplexMatrix {
        &self.amplitudes * self.amplitudes.adjoint()
    }

    /// `(u_a ⊗ u_b)|ψ⟩`, computed as `u_a · M · u_bᵀ` on the amplitude matrix.
    pub fn apply_bilocal(&self, u_a: &ComplexMatrix, u_b: &ComplexMatrix) -> Result<Self> {
        if u_a.shape() != (self.dim_a, self.dim_a) || u_b.shape() != (self.dim_b, self.dim_b) {
            return Err(PhaseError::Dimension(format!(
                "bi-local operator shapes {:?}/{:?} do not match state dims ({}, {})",
                u_a.shape(),
                u_b.shape(),
                self.dim_a,
                self.dim_b
            )));
        }
        let m = u_a * self.amplitude_matrix() * u_b.transpose();
        let amps = ComplexVector::from_fn(self.dim_a * self.dim_b, |k, _| {
            m[(k / self.dim_b, k % self.dim_b)]
        });
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amplitudes: amps,
        })
    }

    /// Applies an operator on the full space.
    pub fn apply(&self, u: &ComplexMatrix) -> Result<Self> {
        let n = self.dim_a * self.dim_b;
        if u.shape() != (n, n) {
            return Err(PhaseError::Dimension(format!(
                "operator {:?} does not act on a space of dimension {n}",
                u.shape()
            )));
        }
        Ok(Self {
            dim_a: self.dim_a,
            dim_b: self.dim_b,
            amplitudes: u * &self.amplitudes,
        })
    }

    /// `⟨ψ|u_a ⊗ I_b|ψ⟩ = Tr(M† u_a M)`.
    pub fn local_a_expectation(&self, u_a: &ComplexMatrix) -> Result<Complex64> {
        if u_a.shape() != (self.dim_a, self.dim_a) {
            return Err(PhaseError::Dimension(format!(
                "operator {:?} does not act on subsystem a of dimension {}",
                u_a.shape(),
                self.dim_a
            )));
        }
        let m = self.amplitude_matrix();
        Ok(m.dotc(&(u_a * &m)))
    }

    fn check_same_dims(&self, other: &BipartiteState) -> Result<()> {
        if self.dim_a != other.dim_a || self.dim_b != other.dim_b {
            return Err(PhaseError::Dimension(format!(
                "states of dims ({}, {}) and ({}, {})",
                self.dim_a, self.dim_b, other.dim_a, other.dim_b
            )));
        }
        Ok(())
    }
}

/// `|ψ⟩ = Σ_i √p_i |μ_i⟩ ⊗ |ν_i⟩` with `p` non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtForm {
    coefficients: Vec<f64>,
    basis_a: ComplexMatrix,
    basis_b: ComplexMatrix,
    non_degenerate: bool,
}

/// Tolerance on `Σ p_i = 1` and on basis orthonormality.
pub const SCHMIDT_TOL: f64 = 1e-10;

impl SchmidtForm {
    /// Assembles a Schmidt form from its parts, validating every invariant.
    ///
    /// `basis_a` is `dim_a × N`, `basis_b` is `dim_b × N` with
    /// `N = min(dim_a, dim_b)`; coefficients must be non-negative, non-increasing,
    /// and sum to one.
    pub fn from_parts(
        coefficients: Vec<f64>,
        basis_a: ComplexMatrix,
        basis_b: ComplexMatrix,
        degeneracy_tol: f64,
    ) -> Result<Self> {
        let n = basis_a.nrows().min(basis_b.nrows());
        if coefficients.len() != n || basis_a.ncols() != n || basis_b.ncols() != n {
            return Err(PhaseError::Dimension(format!(
                "Schmidt rank must be min({}, {}) = {n}; got {} coefficients and {}/{} basis columns",
                basis_a.nrows(),
                basis_b.nrows(),
                coefficients.len(),
                basis_a.ncols(),
                basis_b.ncols()
            )));
        }
        if coefficients.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(PhaseError::Spec(format!(
                "Schmidt coefficients must be finite and non-negative: {coefficients:?}"
            )));
        }
        if coefficients.windows(2).any(|w| w[1] > w[0]) {
            return Err(PhaseError::Spec(format!(
                "Schmidt coefficients must be non-increasing: {coefficients:?}"
            )));
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 1.0).abs() > SCHMIDT_TOL {
            return Err(PhaseError::Normalization { norm_sqr: sum });
        }
        for (name, b) in [("basis_a", &basis_a), ("basis_b", &basis_b)] {
            if !is_finite(b) {
                return Err(PhaseError::NonFinite(name.into()));
            }
            if unitarity_residual(b) > SCHMIDT_TOL {
                return Err(PhaseError::Spec(format!("{name} columns are not orthonormal")));
            }
        }
        let non_degenerate = spectrum_non_degenerate(&coefficients, degeneracy_tol);
        Ok(Self {
            coefficients,
            basis_a,
            basis_b,
            non_degenerate,
        })
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn basis_a(&self) -> &ComplexMatrix {
        &self.basis_a
    }

    pub fn basis_b(&self) -> &ComplexMatrix {
        &self.basis_b
    }

    pub fn mu(&self, i: usize) -> ComplexVector {
        self.basis_a.column(i).into_owned()
    }

    pub fn nu(&self, i: usize) -> ComplexVector {
        self.basis_b.column(i).into_owned()
    }

    pub fn rank(&self) -> usize {
        self.coefficients.len()
    }

    pub fn dim_a(&self) -> usize {
        self.basis_a.nrows()
    }

    pub fn dim_b(&self) -> usize {
        self.basis_b.nrows()
    }

    /// All coefficients pairwise distinct and nonzero.
    pub fn non_degenerate(&self) -> bool {
        self.non_degenerate
    }

    /// Coefficients above `tol` are pairwise separated by more than `tol`.
    ///
    /// Zero-weight components drop out of the reduced density operator, so this
    /// is the condition under which its nonzero eigenvectors are fixed.
    pub fn positive_weights_distinct(&self, tol: f64) -> bool {
        let positive: Vec<f64> = self
            .coefficients
            .iter()
            .copied()
            .filter(|p| *p > tol)
            .collect();
        positive
            .iter()
            .enumerate()
            .all(|(i, a)| positive[i + 1..].iter().all(|b| (a - b).abs() > tol))
    }

    /// `Σ √p_i |μ_i⟩ ⊗ |ν_i⟩`.
    pub fn reassemble(&self) -> BipartiteState {
        let (da, db) = (self.dim_a(), self.dim_b());
        let mut m = ComplexMatrix::zeros(da, db);
        for (i, &p) in self.coefficients.iter().enumerate() {
            m += self.basis_a.column(i) * self.basis_b.column(i).transpose() * Complex64::new(p.sqrt(), 0.0);
        }
        let amps = ComplexVector::from_fn(da * db, |k, _| m[(k / db, k % db)]);
        BipartiteState::normalized(da, db, amps).expect("Schmidt form reassembles to a unit vector")
    }

    /// `ρ_a(0) = Σ p_i |μ_i⟩⟨μ_i|`.
    pub fn reduced_density_a(&self) -> ComplexMatrix {
        weighted_projector(&self.basis_a, &self.coefficients)
    }

    /// The same state with the roles of `a` and `b` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            coefficients: self.coefficients.clone(),
            basis_a: self.basis_b.clone(),
            basis_b: self.basis_a.clone(),
            non_degenerate: self.non_degenerate,
        }
    }

    /// Multiplies `|μ_i⟩` by `e^{iφ_i}` and `|ν_i⟩` by `e^{-iφ_i}`; the state is unchanged.
    pub fn rephased(&self, phases: &[f64]) -> Self {
        let mut out = self.clone();
        for (i, &phi) in phases.iter().enumerate().take(self.rank()) {
            let f = Complex64::from_polar(1.0, phi);
            let a = out.basis_a.column(i) * f;
            out.basis_a.set_column(i, &a);
            let b = out.basis_b.column(i) * f.conj();
            out.basis_b.set_column(i, &b);
        }
        out
    }
}

fn spectrum_non_degenerate(p: &[f64], tol: f64) -> bool {
    p.iter().all(|x| *x > tol)
        && p
            .iter()
            .enumerate()
            .all(|(i, a)| p[i + 1..].iter().all(|b| (a - b).abs() > tol))
}

/// Schmidt decomposition through the singular value decomposition of the
/// amplitude matrix.
///
/// Each `|μ_i⟩` is rephased so its largest-magnitude entry is real and
/// positive; the compensating phase goes into `|ν_i⟩`.
pub fn schmidt_decompose(psi: &BipartiteState, degeneracy_tol: f64) -> Result<SchmidtForm> {
    let norm_sqr = psi.amplitudes().norm_squared();
    if (norm_sqr - 1.0).abs() > NORM_TOL {
        return Err(PhaseError::Normalization { norm_sqr });
    }
    let (da, db) = (psi.dim_a(), psi.dim_b());
    let n = da.min(db);
    let svd = psi.amplitude_matrix().svd(true, true);
    let u = svd.u.expect("left singular vectors requested");
    let v_t = svd.v_t.expect("right singular vectors requested");

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));

    let mut coefficients = Vec::with_capacity(n);
    let mut basis_a = ComplexMatrix::zeros(da, n);
    let mut basis_b = ComplexMatrix::zeros(db, n);
    for (slot, &k) in order.iter().enumerate() {
        let s = svd.singular_values[k];
        coefficients.push(s * s);
        let mu = u.column(k).into_owned();
        // M = Σ s_k u_k v_kᴴ, so ν_k is the k-th row of Vᴴ read as a column.
        let nu = v_t.row(k).transpose();
        let pivot = mu
            .iter()
            .enumerate()
            .fold((0, 0.0), |best, (i, z)| {
                if z.norm() > best.1 + 1e-14 {
                    (i, z.norm())
                } else {
                    best
                }
            })
            .0;
        let gauge = Complex64::from_polar(1.0, -mu[pivot].arg());
        basis_a.set_column(slot, &(mu * gauge));
        basis_b.set_column(slot, &(nu * gauge.conj()));
    }
    let total: f64 = coefficients.iter().sum();
    for p in &mut coefficients {
        *p /= total;
    }
    SchmidtForm::from_parts(coefficients, basis_a, basis_b, degeneracy_tol)
}

/// Identity matrix of size `n`.
pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

/// Standard basis column `|k⟩` of dimension `n`.
pub fn basis_vector(n: usize, k: usize) -> ComplexVector {
    let mut v = ComplexVector::from_element(n, ZERO);
    v[k] = Complex64::new(1.0, 0.0);
    v
}
