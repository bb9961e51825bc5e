use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

/// Partially pivoted LU factorization `P M = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: ComplexMatrix,
    perm: Vec<usize>,
}

impl Lu {
    /// Factors a square matrix. A pivot below `n·ε·‖M‖_F` is treated as singular.
    pub fn factor(m: &ComplexMatrix) -> Result<Self> {
        let n = m.ensure_square("LU input")?;
        let threshold = n as f64 * f64::EPSILON * m.norm_fro();
        let mut lu = m.clone();
        let mut perm: Vec<usize> = (0..n).collect();

        for k in 0..n {
            let (p, pivot_abs) = (k..n)
                .map(|i| (i, lu[(i, k)].norm()))
                .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if pivot_abs <= threshold || pivot_abs == 0.0 {
                return Err(Error::SingularMatrix { pivot: k });
            }
            if p != k {
                for j in 0..n {
                    let tmp = lu[(k, j)];
                    lu[(k, j)] = lu[(p, j)];
                    lu[(p, j)] = tmp;
                }
                perm.swap(k, p);
            }
            let pivot = lu[(k, k)];
            for i in (k + 1)..n {
                let l = lu[(i, k)] / pivot;
                lu[(i, k)] = l;
                if l != Complex64::new(0.0, 0.0) {
                    for j in (k + 1)..n {
                        let u = lu[(k, j)];
                        lu[(i, j)] -= l * u;
                    }
                }
            }
        }
        Ok(Self { lu, perm })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Solves `M X = B` for a matrix right-hand side.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        let n = self.dim();
        if b.rows() != n {
            return Err(Error::ShapeMismatch(format!("rhs has {} rows, expected {n}", b.rows())));
        }
        let cols = b.cols();
        let mut x = ComplexMatrix::from_fn(n, cols, |i, j| b[(self.perm[i], j)]);
        for j in 0..cols {
            for i in 0..n {
                let mut s = x[(i, j)];
                for k in 0..i {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s;
            }
            for i in (0..n).rev() {
                let mut s = x[(i, j)];
                for k in (i + 1)..n {
                    s -= self.lu[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = s / self.lu[(i, i)];
            }
        }
        Ok(x)
    }

    pub fn inverse(&self) -> ComplexMatrix {
        self.solve(&ComplexMatrix::identity(self.dim())).expect("identity has matching shape")
    }

    pub fn determinant(&self) -> Complex64 {
        let n = self.dim();
        let mut det: Complex64 = (0..n).map(|i| self.lu[(i, i)]).product();
        // parity of the permutation
        let mut seen = vec![false; n];
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut len = 0;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                i = self.perm[i];
                len += 1;
            }
            if len % 2 == 0 {
                det = -det;
            }
        }
        det
    }
}

pub fn inverse(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(Lu::factor(m)?.inverse())
}

pub fn solve(m: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    Lu::factor(m)?.solve(b)
}
