//! Seeded random ensembles: Haar unitaries, Gaussian Hermitian generators,
//! random states and Schmidt spectra.

use nalgebra::Complex;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::tensor::{BipartiteState, ComplexMatrix, ComplexVector, SchmidtForm};

pub struct Sampler {
    rng: ChaCha8Rng,
}

impl Sampler {
    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn index(&mut self, lo: usize, hi_inclusive: usize) -> usize {
        self.rng.random_range(lo..=hi_inclusive)
    }

    pub fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Matrix of i.i.d. standard complex Gaussian entries.
    pub fn ginibre(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex_normal())
    }

    /// Haar-distributed unitary (QR of a Ginibre matrix with the phase of
    /// `R`'s diagonal moved into `Q`).
    pub fn unitary(&mut self, n: usize) -> ComplexMatrix {
        let qr = self.ginibre(n, n).qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            let d = r[(j, j)];
            let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex::new(1.0, 0.0) };
            let col = q.column(j) * phase;
            q.set_column(j, &col);
        }
        q
    }

    /// Hermitian matrix `(G + G†)/2` scaled so its spectral radius is `scale`.
    pub fn hermitian(&mut self, n: usize, scale: f64) -> ComplexMatrix {
        let g = self.ginibre(n, n);
        let h = (&g + g.adjoint()) * Complex64::new(0.5, 0.0);
        let radius = h
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |m, e| m.max(e.abs()));
        if radius == 0.0 {
            h
        } else {
            h * Complex64::new(scale / radius, 0.0)
        }
    }

    pub fn unit_vector(&mut self, n: usize) -> ComplexVector {
        let v = ComplexVector::from_fn(n, |_, _| self.complex_normal());
        let norm = v.norm();
        v.unscale(norm)
    }

    /// Haar-random pure state of a `dim_a × dim_b` system.
    pub fn state(&mut self, dim_a: usize, dim_b: usize) -> BipartiteState {
        let v = self.unit_vector(dim_a * dim_b);
        BipartiteState::normalized(dim_a, dim_b, v).expect("random vector is normalizable")
    }

    /// Non-increasing probability vector of length `n` whose entries are
    /// pairwise separated by at least `min_gap` and all at least `min_gap`.
    pub fn schmidt_spectrum(&mut self, n: usize, min_gap: f64) -> Vec<f64> {
        assert!(min_gap * (n * (n + 1) / 2) as f64 <= 1.0, "gap too large for {n} coefficients");
        loop {
            let raw: Vec<f64> = (0..n).map(|_| self.uniform(0.05, 1.0)).collect();
            let total: f64 = raw.iter().sum();
            let mut p: Vec<f64> = raw.iter().map(|x| x / total).collect();
            p.sort_by(|a, b| b.total_cmp(a));
            let ok = p.iter().all(|x| *x >= min_gap) && p.windows(2).all(|w| w[0] - w[1] >= min_gap);
            if ok {
                return p;
            }
        }
    }

    /// Schmidt form with the given coefficients and Haar-random local bases.
    pub fn schmidt_form(&mut self, p: &[f64], dim_a: usize, dim_b: usize) -> SchmidtForm {
        let n = p.len();
        let ua = self.unitary(dim_a).columns(0, n).into_owned();
        let ub = self.unitary(dim_b).columns(0, n).into_owned();
        SchmidtForm::from_parts(p.to_vec(), ua, ub, 1e-9).expect("random Schmidt form is valid")
    }
}
