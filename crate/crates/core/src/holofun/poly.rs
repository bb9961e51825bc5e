//! Dense polynomials, coefficients highest degree first.

use num_complex::Complex64;

use crate::numcore::{eigenvalues, ComplexMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

pub fn trim(mut c: Vec<Complex64>) -> Vec<Complex64> {
    let lead = c.iter().position(|z| *z != ZERO).unwrap_or(c.len().saturating_sub(1));
    c.drain(..lead);
    if c.is_empty() {
        c.push(ZERO);
    }
    c
}

pub fn eval(c: &[Complex64], z: Complex64) -> Complex64 {
    c.iter().fold(ZERO, |acc, &k| acc * z + k)
}

pub fn derivative(c: &[Complex64]) -> Vec<Complex64> {
    let d = c.len().saturating_sub(1);
    if d == 0 {
        return vec![ZERO];
    }
    c[..d].iter().enumerate().map(|(i, &k)| k * (d - i) as f64).collect()
}

pub fn mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

pub fn sub(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let n = a.len().max(b.len());
    let pad = |c: &[Complex64], k: usize| if k + c.len() >= n { c[k + c.len() - n] } else { ZERO };
    (0..n).map(|k| pad(a, k) - pad(b, k)).collect()
}

/// `(p(λ) − p(μ))/(λ − μ)` via synthetic division by `x − μ`.
pub fn divided_difference(c: &[Complex64], l: Complex64, m: Complex64) -> Complex64 {
    if c.len() < 2 {
        return ZERO;
    }
    let mut b = ZERO;
    let mut acc = ZERO;
    for &k in &c[..c.len() - 1] {
        b = b * m + k;
        acc = acc * l + b;
    }
    acc
}

/// Roots as eigenvalues of the companion matrix.
pub fn roots(c: &[Complex64]) -> Vec<Complex64> {
    let c = trim(c.to_vec());
    let d = c.len() - 1;
    if d == 0 {
        return vec![];
    }
    let lead = c[0];
    let comp = ComplexMatrix::from_fn(d, d, |i, j| {
        if i == 0 {
            -c[j + 1] / lead
        } else if i == j + 1 {
            Complex64::new(1.0, 0.0)
        } else {
            ZERO
        }
    });
    eigenvalues(&comp).unwrap_or_default()
}
