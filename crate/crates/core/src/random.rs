//! Seeded random test matrices.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::Result;
use crate::numcore::{eigenvalues, inverse, ComplexMatrix};

pub struct MatrixRng {
    rng: ChaCha8Rng,
}

impl MatrixRng {
    pub fn seeded(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    pub fn complex(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal()) * std::f64::consts::FRAC_1_SQRT_2
    }

    /// Uniform on `[lo, hi)`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        rand::Rng::random_range(&mut self.rng, lo..hi)
    }

    /// Complex Gaussian entries with variance `1/cols`, so `‖A‖₂ = O(1)`.
    pub fn matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let s = 1.0 / (cols as f64).sqrt();
        ComplexMatrix::from_fn(rows, cols, |_, _| self.complex() * s)
    }

    pub fn real_matrix(&mut self, rows: usize, cols: usize) -> ComplexMatrix {
        let s = 1.0 / (cols as f64).sqrt();
        ComplexMatrix::from_fn(rows, cols, |_, _| Complex64::new(self.normal() * s, 0.0))
    }

    /// Random matrix shifted so that every eigenvalue has `Re < bound`.
    pub fn matrix_left_of(&mut self, n: usize, bound: f64) -> Result<ComplexMatrix> {
        let a = self.matrix(n, n);
        let max_re = eigenvalues(&a)?.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
        Ok(a.shift(Complex64::new(bound - 0.25 - max_re, 0.0)))
    }

    /// Random matrix shifted so that every eigenvalue has `Re > bound`.
    pub fn matrix_right_of(&mut self, n: usize, bound: f64) -> Result<ComplexMatrix> {
        let a = self.matrix(n, n);
        let min_re = eigenvalues(&a)?.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
        Ok(a.shift(Complex64::new(bound + 0.25 - min_re, 0.0)))
    }

    /// `V diag(eigs) V⁻¹` with a well-conditioned random `V = I + 0.3·G`.
    pub fn with_spectrum(&mut self, eigs: &[Complex64]) -> Result<ComplexMatrix> {
        let n = eigs.len();
        let v = ComplexMatrix::identity(n) + self.matrix(n, n).scale_real(0.3);
        let vi = inverse(&v)?;
        Ok(v.matmul(&ComplexMatrix::from_diagonal(eigs)).matmul(&vi))
    }

    /// `n` points in the square of half-width `half_width` about `center`, pairwise
    /// at least `min_sep` apart when that is achievable.
    pub fn separated_points(&mut self, n: usize, center: Complex64, half_width: f64, min_sep: f64) -> Vec<Complex64> {
        let mut pts: Vec<Complex64> = Vec::with_capacity(n);
        let mut attempts = 0;
        while pts.len() < n {
            let z = center
                + Complex64::new(
                    self.uniform(-half_width, half_width),
                    self.uniform(-half_width, half_width),
                );
            attempts += 1;
            if attempts > 10_000 || pts.iter().all(|p| (p - z).norm() >= min_sep) {
                pts.push(z);
            }
        }
        pts
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_is_reproducible() {
        let a = MatrixRng::seeded(7).matrix(3, 3);
        let b = MatrixRng::seeded(7).matrix(3, 3);
        assert_eq!(a, b);
    }

    #[test]
    fn shifted_spectra() {
        let mut rng = MatrixRng::seeded(1);
        let a = rng.matrix_left_of(6, -1.0).unwrap();
        assert!(eigenvalues(&a).unwrap().iter().all(|z| z.re < -1.0));
        let b = rng.matrix_right_of(5, 1.0).unwrap();
        assert!(eigenvalues(&b).unwrap().iter().all(|z| z.re > 1.0));
    }
}
