//! Eigenvalues of dense complex matrices: Householder reduction to upper
//! Hessenberg form followed by single-shift complex QR with Wilkinson shifts.

use num_complex::Complex64;

use super::ComplexMatrix;
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Reduces `a` to upper Hessenberg form by unitary similarity.
pub fn hessenberg(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.ensure_square("hessenberg input")?;
    let mut h = a.clone();
    for k in 0..n.saturating_sub(2) {
        let alpha_norm = ((k + 1)..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if alpha_norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * alpha_norm;
        let mut v: Vec<Complex64> = ((k + 1)..n).map(|i| h[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // H <- (I - 2 v v^H) H
        for j in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vi)| vi.conj() * h[(k + 1 + t, j)]).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(k + 1 + t, j)] -= 2.0 * vi * s;
            }
        }
        // H <- H (I - 2 v v^H)
        for i in 0..n {
            let s: Complex64 = v.iter().enumerate().map(|(t, vi)| h[(i, k + 1 + t)] * vi).sum();
            for (t, vi) in v.iter().enumerate() {
                h[(i, k + 1 + t)] -= 2.0 * s * vi.conj();
            }
        }
        for i in (k + 2)..n {
            h[(i, k)] = ZERO;
        }
    }
    Ok(h)
}

/// Rotation `[[c, s], [-conj(s), c]]` mapping `(a, b)` to `(r, 0)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    let an = a.norm();
    let bn = b.norm();
    if bn == 0.0 {
        return (1.0, ZERO);
    }
    if an == 0.0 {
        return (0.0, Complex64::new(1.0, 0.0));
    }
    let r = an.hypot(bn);
    (an / r, (a / an) * b.conj() / r)
}

/// Eigenvalue of the 2x2 block `[[a, b], [c, d]]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let tr_half = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let root = disc.sqrt();
    let l1 = tr_half + root;
    let l2 = tr_half - root;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All `n` eigenvalues of a square matrix, with multiplicity.
///
/// The QR iteration is capped at `50·n` sweeps in total; exceeding the cap
/// yields [`Error::NoConvergence`].
pub fn eigenvalues(a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let n = a.ensure_square("eigenvalue input")?;
    if !a.is_finite() {
        return Err(Error::NonFinite);
    }
    let mut h = hessenberg(a)?;
    let mut eigs = vec![ZERO; n];
    let cap = 50 * n.max(1);
    let mut total = 0usize;
    let mut since_deflation = 0usize;
    let mut hi = n;

    while hi > 0 {
        let last = hi - 1;
        // locate the start of the active unreduced block
        let mut lo = last;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let scale = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            let scale = if scale == 0.0 { h.norm_fro() } else { scale };
            if sub <= f64::EPSILON * scale {
                h[(lo, lo - 1)] = ZERO;
                break;
            }
            lo -= 1;
        }
        if lo == last {
            eigs[last] = h[(last, last)];
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        if total >= cap {
            return Err(Error::NoConvergence { iterations: total });
        }
        total += 1;
        since_deflation += 1;

        let mu = if since_deflation % 11 == 0 {
            // exceptional shift to break cycles
            h[(last, last)] + Complex64::new(0.75, 0.25) * h[(last, last - 1)].norm()
        } else {
            wilkinson_shift(h[(last - 1, last - 1)], h[(last - 1, last)], h[(last, last - 1)], h[(last, last)])
        };

        for i in lo..=last {
            h[(i, i)] -= mu;
        }
        let mut rots = Vec::with_capacity(last - lo);
        for k in lo..last {
            let (c, s) = givens(h[(k, k)], h[(k + 1, k)]);
            for j in k..=last {
                let x = h[(k, j)];
                let y = h[(k + 1, j)];
                h[(k, j)] = c * x + s * y;
                h[(k + 1, j)] = -s.conj() * x + c * y;
            }
            h[(k + 1, k)] = ZERO;
            rots.push((c, s));
        }
        for (idx, (c, s)) in rots.into_iter().enumerate() {
            let k = lo + idx;
            let row_end = (k + 2).min(last);
            for i in lo..=row_end {
                let x = h[(i, k)];
                let y = h[(i, k + 1)];
                h[(i, k)] = c * x + s.conj() * y;
                h[(i, k + 1)] = -s * x + c * y;
            }
        }
        for i in lo..=last {
            h[(i, i)] += mu;
        }
    }
    Ok(eigs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_by_re_im(mut v: Vec<Complex64>) -> Vec<Complex64> {
        v.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap().then(a.im.partial_cmp(&b.im).unwrap()));
        v
    }

    #[test]
    fn diagonal() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 3.0]]);
        let e = sorted_by_re_im(eigenvalues(&a).unwrap());
        for (k, z) in e.iter().enumerate() {
            assert!((z - Complex64::new(k as f64 + 1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn rotation() {
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[-1.0, 0.0]]);
        let e = sorted_by_re_im(eigenvalues(&a).unwrap());
        assert!((e[0] - Complex64::new(0.0, -1.0)).norm() < 1e-14);
        assert!((e[1] - Complex64::new(0.0, 1.0)).norm() < 1e-14);
    }

    #[test]
    fn hessenberg_preserves_trace_and_shape() {
        let a = ComplexMatrix::from_fn(5, 5, |i, j| Complex64::new((i * 3 + j) as f64 % 7.0, (i + 2 * j) as f64 % 3.0));
        let h = hessenberg(&a).unwrap();
        for i in 2..5 {
            for j in 0..i - 1 {
                assert_eq!(h[(i, j)], ZERO);
            }
        }
        assert!((h.trace() - a.trace()).norm() < 1e-12);
        assert!((h.norm_fro() - a.norm_fro()).abs() < 1e-12);
    }

    #[test]
    fn jordan_block_and_zero_matrix() {
        let j = ComplexMatrix::from_real_rows(&[&[2.0, 1.0], &[0.0, 2.0]]);
        for z in eigenvalues(&j).unwrap() {
            assert!((z - Complex64::new(2.0, 0.0)).norm() < 1e-7);
        }
        let z = ComplexMatrix::zeros(3, 3);
        assert!(eigenvalues(&z).unwrap().iter().all(|e| e.norm() == 0.0));
    }
}
