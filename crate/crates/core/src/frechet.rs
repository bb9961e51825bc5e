//! Fréchet differentials of `A ↦ f(A)`.
//!
//! `df(ΔA, A) = (1/2πi)∮ f(λ) R_λ ΔA R_λ dλ = (φ_A ⊡ φ_A)(f) ΔA`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{boxdot_result, boxtimes_result, funm, funm_contour_of, CalculusOptions, ExpFamily};
use crate::contour::QuadratureResult;
use crate::error::{Error, Result};
use crate::gauss;
use crate::holofun::{HoloFun1, HoloFun2};
use crate::numcore::{eigenvalues, norm2_estimate, resolvent, ComplexMatrix, Lu};

#[derive(Debug, Clone)]
pub struct DifferentialRequest {
    pub f: HoloFun1,
    pub a: ComplexMatrix,
    pub delta: ComplexMatrix,
}

impl DifferentialRequest {
    pub fn new(f: HoloFun1, a: ComplexMatrix, delta: ComplexMatrix) -> Result<Self> {
        let n = a.ensure_square("A")?;
        if delta.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!("ΔA must be {n}x{n}, got {:?}", delta.shape())));
        }
        Ok(Self { f, a, delta })
    }
}

/// Runs a linear map on `x/‖x‖` and rescales, so quadrature tolerances act
/// relative to `‖x‖`.
fn on_unit(
    x: &ComplexMatrix,
    map: impl FnOnce(&ComplexMatrix) -> Result<QuadratureResult>,
) -> Result<QuadratureResult> {
    let s = x.norm_fro();
    if s == 0.0 {
        return Ok(QuadratureResult { value: x.clone(), error_estimate: 0.0, nodes_used: 0 });
    }
    let r = map(&x.scale_real(1.0 / s))?;
    Ok(QuadratureResult { value: r.value.scale_real(s), error_estimate: r.error_estimate * s, ..r })
}

/// `df(ΔA, A)` with quadrature diagnostics.
pub fn frechet_result(req: &DifferentialRequest, opts: &CalculusOptions) -> Result<QuadratureResult> {
    on_unit(&req.delta, |d| boxdot_result(&req.f, &req.a, &req.a, d, opts))
}

pub fn frechet(req: &DifferentialRequest, opts: &CalculusOptions) -> Result<ComplexMatrix> {
    Ok(frechet_result(req, opts)?.value)
}

/// Upper-right block of `f([[A, ΔA], [0, A]])`.
pub fn frechet_block_oracle(
    f: &HoloFun1,
    a: &ComplexMatrix,
    delta: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    let req = DifferentialRequest::new(f.clone(), a.clone(), delta.clone())?;
    let n = req.a.rows();
    let s = delta.norm_fro();
    if s == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    // the block is linear in ΔA; a moderate coupling keeps the doubled
    // eigenvalues of the block matrix well resolved
    let k = a.norm_fro().max(1.0) / s;
    let z = ComplexMatrix::zeros(n, n);
    let block = ComplexMatrix::block2x2(a, &delta.scale_real(k), &z, a)?;
    Ok(funm(f, &block, opts)?.submatrix(0, n, n, n).scale_real(1.0 / k))
}

fn check_time(t: f64) -> Result<()> {
    if t.is_finite() && t >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("time must be real and non-negative, got {t}")))
    }
}

/// `∫₀^t e^{(t−s)A} X M e^{sA} ds` by composite Gauss–Legendre; `M = I` when
/// `right` is `None`.
fn duhamel(a: &ComplexMatrix, x: &ComplexMatrix, t: f64, right: Option<&ComplexMatrix>, opts: &CalculusOptions) -> Result<ComplexMatrix> {
    let n = a.rows();
    if t == 0.0 {
        return Ok(ComplexMatrix::zeros(n, n));
    }
    let fam = ExpFamily::converge(a, 1.0, &[0.0, 0.5 * t, t], opts)?;
    let panels = ((2.0 * t * norm2_estimate(a)).ceil() as usize).max(2);
    let rule = gauss::composite(0.0, t, panels, 8);
    let inner = match right {
        Some(m) => x.matmul(m),
        None => x.clone(),
    };
    let terms: Vec<ComplexMatrix> = rule
        .par_iter()
        .map(|&(s, w)| fam.at(t - s, 1).matmul(&inner).matmul(&fam.at(s, 1)).scale_real(w))
        .collect();
    let mut acc = ComplexMatrix::zeros(n, n);
    for term in &terms {
        acc += term;
    }
    Ok(acc)
}

/// `d exp_t(ΔA, A) = ∫₀^t e^{(t−s)A} ΔA e^{sA} ds`.
pub fn frechet_exp(a: &ComplexMatrix, delta: &ComplexMatrix, t: f64, opts: &CalculusOptions) -> Result<ComplexMatrix> {
    check_time(t)?;
    DifferentialRequest::new(HoloFun1::exp(t), a.clone(), delta.clone())?;
    duhamel(a, delta, t, None, opts)
}

/// `d(x e^{xt})(ΔA, A) = e^{At} ΔA + ∫₀^t e^{(t−s)A} ΔA A e^{sA} ds`.
pub fn frechet_xexp(a: &ComplexMatrix, delta: &ComplexMatrix, t: f64, opts: &CalculusOptions) -> Result<ComplexMatrix> {
    check_time(t)?;
    DifferentialRequest::new(HoloFun1::xexp(t), a.clone(), delta.clone())?;
    let head = funm(&HoloFun1::exp(t), a, opts)?.matmul(delta);
    Ok(head + duhamel(a, delta, t, Some(a), opts)?)
}

/// `{f^{[1]}(λᵢ, λⱼ)}` over all ordered eigenvalue pairs.
pub fn frechet_spectrum(f: &HoloFun1, a: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let eigs = eigenvalues(a)?;
    Ok(eigs.iter().flat_map(|&l| eigs.iter().map(move |&m| f.divided_difference(l, m))).collect())
}

/// The differential of `B ↦ f⁻¹(B)` at `B = f(A)`, applied to `ΔB`: the
/// double-contour transformator of `1/f^{[1]}`.
pub fn inverse_frechet(
    f: &HoloFun1,
    a: &ComplexMatrix,
    delta_b: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    let req = DifferentialRequest::new(f.clone(), a.clone(), delta_b.clone())?;
    let values = frechet_spectrum(f, &req.a)?;
    let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let distance = values.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
    if !(distance > 1e-8 * scale) {
        return Err(Error::DegenerateDifferential { distance });
    }
    let kernel = HoloFun2::composed(HoloFun1::reciprocal(), HoloFun2::DividedDifference(f.clone()));
    Ok(on_unit(delta_b, |d| boxtimes_result(&kernel, a, a, d, opts))?.value)
}

/// `T_λ = R_λ (I − ΔA R_λ)⁻¹`, the resolvent of `A + ΔA` written as a
/// perturbation of the resolvent of `A`.
pub fn perturbed_resolvent(a: &ComplexMatrix, delta: &ComplexMatrix, l: Complex64) -> Result<ComplexMatrix> {
    let n = a.ensure_square("A")?;
    if delta.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("ΔA must be {n}x{n}, got {:?}", delta.shape())));
    }
    let r = resolvent(a, l)?;
    let k = ComplexMatrix::identity(n) - delta.matmul(&r);
    let k_inv = Lu::factor(&k).map_err(|_| Error::SingularResolvent(l))?.inverse();
    Ok(r.matmul(&k_inv))
}

/// Fixed-node rule for `X ↦ Σⱼ cⱼ Rⱼ X Rⱼ` together with its adjoint.
struct DifferentialRule {
    coeffs: Vec<Complex64>,
    resolvents: Vec<ComplexMatrix>,
}

impl DifferentialRule {
    fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(x.rows(), x.cols());
        for (c, r) in self.coeffs.iter().zip(&self.resolvents) {
            acc.axpy(*c, &r.matmul(x).matmul(r));
        }
        acc
    }

    fn adjoint(&self, x: &ComplexMatrix) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(x.rows(), x.cols());
        for (c, r) in self.coeffs.iter().zip(&self.resolvents) {
            let ra = r.adjoint();
            acc.axpy(c.conj(), &ra.matmul(x).matmul(&ra));
        }
        acc
    }
}

const NORM_ITERATIONS: usize = 40;

/// Estimate of `‖df(·, A)‖` as an operator on the Frobenius space, by power
/// iteration on `L*L` without materializing the lift.
pub fn frechet_norm_estimate(f: &HoloFun1, a: &ComplexMatrix, opts: &CalculusOptions) -> Result<f64> {
    let n = a.ensure_square("A")?;
    let probe = ComplexMatrix::from_fn(n, n, |i, j| Complex64::new(1.0 + 0.1 * i as f64, 0.1 * j as f64));
    let req = DifferentialRequest::new(f.clone(), a.clone(), probe.clone())?;
    let count = frechet_result(&req, opts)?.nodes_used;
    let nodes = funm_contour_of(f, a, opts)?.with_nodes(count)?.nodes();
    let resolvents: Vec<ComplexMatrix> = nodes.par_iter().map(|nd| resolvent(a, nd.z)).collect::<Result<_>>()?;
    let coeffs = nodes.iter().map(|nd| nd.w / Complex64::new(0.0, 2.0 * PI) * f.eval(nd.z)).collect();
    let rule = DifferentialRule { coeffs, resolvents };

    let mut x = probe.scale_real(1.0 / probe.norm_fro());
    let mut estimate = 0.0;
    for _ in 0..NORM_ITERATIONS {
        let y = rule.apply(&x);
        estimate = y.norm_fro();
        let z = rule.adjoint(&y);
        let s = z.norm_fro();
        if s == 0.0 {
            break;
        }
        x = z.scale_real(1.0 / s);
    }
    Ok(estimate)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_has_the_symmetrized_differential() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.5, -1.0]]);
        let d = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[3.0, 0.2]]);
        let req = DifferentialRequest::new(HoloFun1::Pow(2), a.clone(), d.clone()).unwrap();
        let want = a.matmul(&d) + d.matmul(&a);
        let opts = CalculusOptions::default();
        assert!(frechet(&req, &opts).unwrap().rel_dist(&want) < 1e-12);
        assert!(frechet_block_oracle(&HoloFun1::Pow(2), &a, &d, &opts).unwrap().rel_dist(&want) < 1e-12);
    }

    #[test]
    fn zero_direction_and_zero_time() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.5, -1.0]]);
        let z = ComplexMatrix::zeros(2, 2);
        let opts = CalculusOptions::default();
        let req = DifferentialRequest::new(HoloFun1::exp(1.0), a.clone(), z.clone()).unwrap();
        assert_eq!(frechet(&req, &opts).unwrap(), z);
        assert_eq!(frechet_exp(&a, &a, 0.0, &opts).unwrap(), z);
        assert!(frechet_xexp(&a, &a, 0.0, &opts).unwrap().dist(&a) < 1e-12);
        assert!(frechet_exp(&a, &a, -1.0, &opts).is_err());
    }

    #[test]
    fn identity_spectrum_is_all_ones() {
        let a = ComplexMatrix::from_real_rows(&[&[1.0, 2.0], &[0.5, -1.0]]);
        for v in frechet_spectrum(&HoloFun1::Id, &a).unwrap() {
            assert!((v - 1.0).norm() < 1e-14);
        }
    }
}
