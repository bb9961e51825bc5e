//! Dense complex linear algebra used by every calculus in the crate.
//!
//! `vec` is column-stacking throughout, so the transformator `C ↦ A C B`
//! lifts to `Bᵀ ⊗ A`.

mod eigen;
mod lu;
mod matrix;

use num_complex::Complex64;

pub use eigen::{eigenvalues, hessenberg};
pub use lu::{inverse, solve, Lu};
pub use matrix::ComplexMatrix;

use crate::error::{Error, Result};

/// `(λI − A)⁻¹`.
pub fn resolvent(a: &ComplexMatrix, lambda: Complex64) -> Result<ComplexMatrix> {
    a.ensure_square("resolvent operand")?;
    let shifted = a.scale_real(-1.0).shift(lambda);
    match Lu::factor(&shifted) {
        Ok(lu) => Ok(lu.inverse()),
        Err(Error::SingularMatrix { .. }) => Err(Error::SingularResolvent(lambda)),
        Err(e) => Err(e),
    }
}

/// Factored `λI − A`, for repeated solves at one node.
pub fn resolvent_lu(a: &ComplexMatrix, lambda: Complex64) -> Result<Lu> {
    let shifted = a.scale_real(-1.0).shift(lambda);
    Lu::factor(&shifted).map_err(|e| match e {
        Error::SingularMatrix { .. } => Error::SingularResolvent(lambda),
        other => other,
    })
}

/// Matrix of a transformator `C ↦ Σ Aᵢ C Bᵢ` acting on `n×m` matrices.
#[derive(Debug, Clone)]
pub struct TransformatorMatrix {
    n: usize,
    m: usize,
    lift: ComplexMatrix,
}

impl TransformatorMatrix {
    pub fn from_lift(n: usize, m: usize, lift: ComplexMatrix) -> Result<Self> {
        if lift.shape() != (n * m, n * m) {
            return Err(Error::ShapeMismatch(format!(
                "lift is {:?}, expected {}x{}",
                lift.shape(),
                n * m,
                n * m
            )));
        }
        Ok(Self { n, m, lift })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn lift(&self) -> &ComplexMatrix {
        &self.lift
    }

    pub fn into_lift(self) -> ComplexMatrix {
        self.lift
    }

    pub fn apply(&self, c: &ComplexMatrix) -> Result<ComplexMatrix> {
        if c.shape() != (self.n, self.m) {
            return Err(Error::ShapeMismatch(format!(
                "transformator acts on {}x{}, got {:?}",
                self.n,
                self.m,
                c.shape()
            )));
        }
        ComplexMatrix::unvec(&self.lift.matmul(&c.vec()), self.n, self.m)
    }

    /// Lift of `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if (self.n, self.m) != (other.n, other.m) {
            return Err(Error::ShapeMismatch("composed transformators act on different spaces".into()));
        }
        Ok(Self { n: self.n, m: self.m, lift: self.lift.matmul(&other.lift) })
    }

    pub fn eigenvalues(&self) -> Result<Vec<Complex64>> {
        eigenvalues(&self.lift)
    }
}

/// `Σ Bᵢᵀ ⊗ Aᵢ`, the lift of `C ↦ Σ Aᵢ C Bᵢ`.
pub fn kron_lift(terms: &[(ComplexMatrix, ComplexMatrix)]) -> Result<TransformatorMatrix> {
    let (first_a, first_b) = terms
        .first()
        .ok_or_else(|| Error::InvalidInput("kron_lift needs at least one term".into()))?;
    let n = first_a.ensure_square("left factor")?;
    let m = first_b.ensure_square("right factor")?;
    let mut lift = ComplexMatrix::zeros(n * m, n * m);
    for (a, b) in terms {
        if a.shape() != (n, n) || b.shape() != (m, m) {
            return Err(Error::ShapeMismatch(format!(
                "term shapes {:?}, {:?} differ from {n}x{n}, {m}x{m}",
                a.shape(),
                b.shape()
            )));
        }
        lift += &b.transpose().kron(a);
    }
    Ok(TransformatorMatrix { n, m, lift })
}

/// Power-iteration estimate of the spectral norm (30 steps on `M* M`).
pub fn norm2_estimate(m: &ComplexMatrix) -> f64 {
    let cols = m.cols();
    // fixed, non-symmetric start so that no singular direction is missed by construction
    let mut v = ComplexMatrix::from_fn(cols, 1, |i, _| Complex64::new(1.0 + 0.1 * i as f64, 0.05 * i as f64));
    let adj = m.adjoint();
    let mut sigma = 0.0;
    for _ in 0..30 {
        let nv = v.norm_fro();
        if nv == 0.0 {
            return 0.0;
        }
        v = v.scale_real(1.0 / nv);
        let w = m.matmul(&v);
        sigma = w.norm_fro();
        v = adj.matmul(&w);
    }
    sigma
}

/// `(A − B)⁻¹` together with the geometric-series bound on `‖(A − B)⁻¹ − A⁻¹‖`.
#[derive(Debug, Clone)]
pub struct PerturbedInverse {
    pub inverse: ComplexMatrix,
    pub bound: f64,
}

pub fn perturbed_inverse(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<PerturbedInverse> {
    let n = a.ensure_square("perturbed_inverse base")?;
    if b.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("perturbation is {:?}, expected {n}x{n}", b.shape())));
    }
    let a_inv = inverse(a)?;
    let nb = norm2_estimate(b);
    let nai = norm2_estimate(&a_inv);
    let q = nb * nai;
    if q >= 1.0 {
        return Err(Error::NotApplicable(format!("‖B‖·‖A⁻¹‖ = {q:.3e} is not below 1")));
    }
    let inv = inverse(&(a - b))?;
    Ok(PerturbedInverse { inverse: inv, bound: nb * nai * nai / (1.0 - q) })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn resolvent_of_diagonal() {
        let a = ComplexMatrix::from_diagonal(&[c(2.0), c(3.0)]);
        let r = resolvent(&a, c(1.0)).unwrap();
        assert!((r[(0, 0)] - c(-1.0)).norm() < 1e-15);
        assert!((r[(1, 1)] - c(-0.5)).norm() < 1e-15);
        assert!(matches!(resolvent(&a, c(2.0)), Err(Error::SingularResolvent(_))));
    }

    #[test]
    fn scalar_neumann_bound() {
        let a = ComplexMatrix::identity(2).scale_real(2.0);
        let b = ComplexMatrix::identity(2).scale_real(0.5);
        let p = perturbed_inverse(&a, &b).unwrap();
        assert!(p.inverse.dist(&ComplexMatrix::identity(2).scale_real(2.0 / 3.0)) < 1e-15);
        assert!((p.bound - 1.0 / 6.0).abs() < 1e-12);
        let big = ComplexMatrix::identity(2).scale_real(3.0);
        assert!(matches!(perturbed_inverse(&a, &big), Err(Error::NotApplicable(_))));
    }

    #[test]
    fn identity_lift() {
        let i2 = ComplexMatrix::identity(2);
        let t = kron_lift(&[(i2.clone(), i2)]).unwrap();
        assert!(t.lift().dist(&ComplexMatrix::identity(4)) == 0.0);
    }

    #[test]
    fn norm_estimate_of_diagonal() {
        let d = ComplexMatrix::from_diagonal(&[c(1.0), c(-4.0), c(2.0)]);
        assert!((norm2_estimate(&d) - 4.0).abs() < 1e-8);
    }
}
