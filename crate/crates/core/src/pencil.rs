//! Quadratic pencils `λ²E + λF + H` and the second-order ODE they govern.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{boxdot_result, with_shrinking, CalculusOptions};
use crate::contour::{default_margin, envelope, Contour, SpectralEnclosure};
use crate::error::{Error, Result};
use crate::holofun::HoloFun1;
use crate::numcore::{eigenvalues, inverse, ComplexMatrix, Lu};
use crate::random::MatrixRng;
use crate::sylvester::{solve_sylvester, SylvesterMethod, SylvesterProblem};

#[derive(Debug, Clone)]
pub struct QuadraticPencil {
    e: ComplexMatrix,
    f: ComplexMatrix,
    h: ComplexMatrix,
    e_inv: ComplexMatrix,
    spectrum: Vec<Complex64>,
}

impl QuadraticPencil {
    pub fn new(e: ComplexMatrix, f: ComplexMatrix, h: ComplexMatrix) -> Result<Self> {
        let n = e.ensure_square("E")?;
        if f.shape() != (n, n) || h.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!(
                "pencil coefficients must all be {n}x{n}, got F {:?} and H {:?}",
                f.shape(),
                h.shape()
            )));
        }
        if !(e.is_finite() && f.is_finite() && h.is_finite()) {
            return Err(Error::NonFinite);
        }
        let e_inv = inverse(&e).map_err(|_| Error::NotApplicable("leading coefficient E is singular".into()))?;
        let spectrum = eigenvalues(&companion(&e_inv, &f, &h))?;
        Ok(Self { e, f, h, e_inv, spectrum })
    }

    /// `λ² + λF + H`.
    pub fn monic(f: ComplexMatrix, h: ComplexMatrix) -> Result<Self> {
        let n = f.ensure_square("F")?;
        Self::new(ComplexMatrix::identity(n), f, h)
    }

    pub fn dim(&self) -> usize {
        self.e.rows()
    }

    pub fn e(&self) -> &ComplexMatrix {
        &self.e
    }

    pub fn f(&self) -> &ComplexMatrix {
        &self.f
    }

    pub fn h(&self) -> &ComplexMatrix {
        &self.h
    }

    /// The `2n` eigenvalues of the companion linearization.
    pub fn spectrum(&self) -> &[Complex64] {
        &self.spectrum
    }

    pub fn spectrum_enclosure(&self, margin: f64) -> SpectralEnclosure {
        SpectralEnclosure::from_points(&self.spectrum, margin)
    }

    /// `λ²E + λF + H`.
    pub fn at(&self, l: Complex64) -> ComplexMatrix {
        let mut m = self.e.scale(l * l);
        m.axpy(l, &self.f);
        m += &self.h;
        m
    }

    fn scale(&self) -> f64 {
        1.0 + self.spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `[[0, I], [−E⁻¹H, −E⁻¹F]]`.
fn companion(e_inv: &ComplexMatrix, f: &ComplexMatrix, h: &ComplexMatrix) -> ComplexMatrix {
    let n = f.rows();
    let mut l = ComplexMatrix::zeros(2 * n, 2 * n);
    l.set_block(0, n, &ComplexMatrix::identity(n));
    l.set_block(n, 0, &-e_inv.matmul(h));
    l.set_block(n, n, &-e_inv.matmul(f));
    l
}

/// `(λ²E + λF + H)⁻¹`, refusing points on the pencil spectrum.
pub fn pencil_resolvent(p: &QuadraticPencil, l: Complex64) -> Result<ComplexMatrix> {
    let near = p.spectrum.iter().map(|z| (z - l).norm()).fold(f64::INFINITY, f64::min);
    if near <= 1e-10 * p.scale() {
        return Err(Error::SingularPencil(l));
    }
    let m = p.at(l);
    let r = Lu::factor(&m).map_err(|_| Error::SingularPencil(l))?.inverse();
    let n = p.dim();
    let residual = (m.matmul(&r) - ComplexMatrix::identity(n)).norm_fro();
    if !(residual <= 1e-6 * (n as f64).sqrt()) {
        return Err(Error::SingularPencil(l));
    }
    Ok(r)
}

/// Impulse response `T(t)` and its time derivative at one instant.
#[derive(Debug, Clone)]
pub struct Response {
    pub time: f64,
    pub value: ComplexMatrix,
    pub derivative: ComplexMatrix,
    pub nodes_used: usize,
    pub error_estimate: f64,
}

fn check_times(ts: &[f64]) -> Result<()> {
    match ts.iter().find(|t| !(t.is_finite() && **t >= 0.0)) {
        Some(t) => Err(Error::InvalidInput(format!("time must be real and non-negative, got {t}"))),
        None => Ok(()),
    }
}

fn pencil_contour(p: &QuadraticPencil, opts: &CalculusOptions) -> Result<Contour> {
    let margin = opts.margin.unwrap_or_else(|| default_margin(&p.spectrum));
    with_shrinking(|s| envelope(&SpectralEnclosure::from_points(&p.spectrum, margin * s), &SpectralEnclosure::empty()))
}

/// `T(t) = (1/2πi)∮ e^{λt} R_λ dλ` and `Ṫ(t) = (1/2πi)∮ λe^{λt} R_λ dλ`.
pub fn impulse_response(p: &QuadraticPencil, t: f64, opts: &CalculusOptions) -> Result<Response> {
    Ok(impulse_responses(p, &[t], opts)?.remove(0))
}

/// Impulse responses at several times on one contour; the node count is
/// doubled until every requested time has settled.
pub fn impulse_responses(p: &QuadraticPencil, ts: &[f64], opts: &CalculusOptions) -> Result<Vec<Response>> {
    opts.validate()?;
    check_times(ts)?;
    if ts.is_empty() {
        return Ok(Vec::new());
    }
    let contour = pencil_contour(p, opts)?;
    let n = p.dim();
    let mut count = opts.start_nodes;
    loop {
        let nodes = contour.with_nodes(count)?.nodes();
        let resolvents: Vec<ComplexMatrix> = nodes.par_iter().map(|nd| pencil_resolvent(p, nd.z)).collect::<Result<_>>()?;
        let coeffs: Vec<Complex64> = nodes.iter().map(|nd| nd.w / Complex64::new(0.0, 2.0 * PI)).collect();
        let sum = |t: f64, stride: usize| {
            let mut value = ComplexMatrix::zeros(n, n);
            let mut derivative = ComplexMatrix::zeros(n, n);
            for (k, (nd, r)) in nodes.iter().zip(&resolvents).enumerate() {
                if k % stride == 0 {
                    let c = coeffs[k] * (nd.z * t).exp() * stride as f64;
                    value.axpy(c, r);
                    derivative.axpy(c * nd.z, r);
                }
            }
            (value, derivative)
        };
        let results: Vec<(ComplexMatrix, ComplexMatrix, f64)> = ts
            .par_iter()
            .map(|&t| {
                let (v, d) = sum(t, 1);
                let (hv, hd) = sum(t, 2);
                let est = v.dist(&hv).max(d.dist(&hd));
                (v, d, est)
            })
            .collect();
        let worst = results
            .iter()
            .map(|(v, d, e)| e / (1.0 + v.norm_fro().max(d.norm_fro())))
            .fold(0.0, f64::max);
        if results.iter().any(|(v, d, _)| !(v.is_finite() && d.is_finite())) {
            return Err(Error::NonFinite);
        }
        if worst <= opts.tol {
            return Ok(ts
                .iter()
                .zip(results)
                .map(|(&time, (value, derivative, error_estimate))| Response {
                    time,
                    value,
                    derivative,
                    nodes_used: count,
                    error_estimate,
                })
                .collect());
        }
        if count * 2 > opts.node_cap {
            return Err(Error::QuadratureStall { nodes: count, error_estimate: worst });
        }
        count *= 2;
    }
}

/// `λ²E + λF + H = (λ − A₂) E (λ − A₁)`; `A₁` is a right solvent.
#[derive(Debug, Clone)]
pub struct PencilFactorization {
    pub a1: ComplexMatrix,
    pub a2: ComplexMatrix,
}

impl PencilFactorization {
    pub fn new(a1: ComplexMatrix, a2: ComplexMatrix) -> Result<Self> {
        let n = a1.ensure_square("A1")?;
        if a2.shape() != (n, n) {
            return Err(Error::ShapeMismatch(format!("A1 is {n}x{n} but A2 is {:?}", a2.shape())));
        }
        Ok(Self { a1, a2 })
    }

    /// The factorization of a monic pencil built from a right solvent `X`:
    /// `A₁ = X`, `A₂ = −F − X`.
    pub fn from_right_solvent(f: &ComplexMatrix, x: &ComplexMatrix) -> Result<Self> {
        Self::new(x.clone(), -(f + x))
    }

    /// The pencil `(λ − A₂) E (λ − A₁)`.
    pub fn pencil(&self, e: &ComplexMatrix) -> Result<QuadraticPencil> {
        let f = -(e.matmul(&self.a1) + self.a2.matmul(e));
        let h = self.a2.matmul(e).matmul(&self.a1);
        QuadraticPencil::new(e.clone(), f, h)
    }
}

/// Outcome of [`verify_factorization`].
#[derive(Debug, Clone, Copy)]
pub struct FactorizationCheck {
    /// `‖F + EA₁ + A₂E‖ + ‖H − A₂EA₁‖` relative to the coefficient scale.
    pub coefficient_error: f64,
    /// Largest relative gap between `R_λ` and `R_{A₁,λ} E⁻¹ R_{A₂,λ}` over the sample points.
    pub resolvent_error: f64,
}

/// Checks a supplied factorization against the pencil, including the resolvent
/// identity at `points` seeded regular points on a circle enclosing the spectrum.
pub fn verify_factorization(
    p: &QuadraticPencil,
    fact: &PencilFactorization,
    points: usize,
    seed: u64,
    tol: f64,
) -> Result<FactorizationCheck> {
    let e = &p.e;
    let f_err = (&p.f + &(e.matmul(&fact.a1) + fact.a2.matmul(e))).norm_fro();
    let h_err = (&p.h - &fact.a2.matmul(e).matmul(&fact.a1)).norm_fro();
    let coeff_scale = 1.0 + p.e.norm_fro() + p.f.norm_fro() + p.h.norm_fro();
    let coefficient_error = (f_err + h_err) / coeff_scale;

    let mut rng = MatrixRng::seeded(seed);
    let radius = 1.5 * p.scale();
    let mut resolvent_error: f64 = 0.0;
    for _ in 0..points {
        let l = Complex64::from_polar(radius * rng.uniform(0.7, 1.0), rng.uniform(0.0, 2.0 * PI));
        let direct = pencil_resolvent(p, l)?;
        let r1 = crate::numcore::resolvent(&fact.a1, l)?;
        let r2 = crate::numcore::resolvent(&fact.a2, l)?;
        let factored = r1.matmul(&p.e_inv).matmul(&r2);
        resolvent_error = resolvent_error.max(factored.rel_dist(&direct));
    }
    let check = FactorizationCheck { coefficient_error, resolvent_error };
    let worst = coefficient_error.max(resolvent_error);
    if !(worst <= tol) {
        return Err(Error::ResidualCheckFailed { residual: worst, tolerance: tol });
    }
    Ok(check)
}

/// `T(t) = (φ_{A₁} ⊡ φ_{A₂})(exp_t) E⁻¹` and `Ṫ(t)` with `x e^{xt}` in place of `exp_t`.
pub fn impulse_response_factored(
    fact: &PencilFactorization,
    e: &ComplexMatrix,
    t: f64,
    opts: &CalculusOptions,
) -> Result<Response> {
    check_times(&[t])?;
    let n = fact.a1.rows();
    if e.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("E must be {n}x{n}, got {:?}", e.shape())));
    }
    let middle = inverse(e).map_err(|_| Error::NotApplicable("leading coefficient E is singular".into()))?;
    let value = boxdot_result(&HoloFun1::exp(t), &fact.a1, &fact.a2, &middle, opts)?;
    let derivative = boxdot_result(&HoloFun1::xexp(t), &fact.a1, &fact.a2, &middle, opts)?;
    Ok(Response {
        time: t,
        value: value.value,
        derivative: derivative.value,
        nodes_used: value.nodes_used.max(derivative.nodes_used),
        error_estimate: value.error_estimate.max(derivative.error_estimate),
    })
}

#[derive(Debug, Clone)]
pub struct SolventResult {
    pub x: ComplexMatrix,
    /// Residual evaluations performed, the last one being the accepted iterate.
    pub iterations: usize,
    /// `‖X² + FX + H‖_F` relative to `‖X‖² + ‖F‖‖X‖ + ‖H‖`.
    pub residual: f64,
}

const NEWTON_MAX_ITERATIONS: usize = 30;

/// Newton's method for `X² + FX + H = 0`; each step solves
/// `(X + F)Δ − Δ(−X) = −(X² + FX + H)`.
pub fn right_solvent_newton(
    f: &ComplexMatrix,
    h: &ComplexMatrix,
    x0: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<SolventResult> {
    opts.validate()?;
    let n = f.ensure_square("F")?;
    if h.shape() != (n, n) || x0.shape() != (n, n) {
        return Err(Error::ShapeMismatch(format!("F, H and X0 must all be {n}x{n}")));
    }
    if !(f.is_finite() && h.is_finite() && x0.is_finite()) {
        return Err(Error::NonFinite);
    }
    let relative = |x: &ComplexMatrix| {
        let r = x.matmul(x) + f.matmul(x) + h.clone();
        let nx = x.norm_fro();
        let scale = (nx * nx + f.norm_fro() * nx + h.norm_fro()).max(f64::MIN_POSITIVE);
        let res = r.norm_fro() / scale;
        (r, res)
    };
    let mut x = x0.clone();
    let mut best = (x.clone(), f64::INFINITY);
    for it in 1..=NEWTON_MAX_ITERATIONS {
        let (r, res) = relative(&x);
        if !res.is_finite() {
            return Err(Error::NewtonStall { iterations: it, residual: res });
        }
        if res < best.1 {
            best = (x.clone(), res);
        }
        if res <= 1e-13 || r.norm_fro() == 0.0 {
            return Ok(SolventResult { x, iterations: it, residual: res });
        }
        let p = SylvesterProblem::new(&x + f, -x.clone(), -r)?;
        let step = solve_sylvester(&p, SylvesterMethod::Contour, opts)?;
        x += &step.z;
    }
    let (x, res) = best;
    if res <= 1e-10 {
        Ok(SolventResult { x, iterations: NEWTON_MAX_ITERATIONS, residual: res })
    } else {
        Err(Error::NewtonStall { iterations: NEWTON_MAX_ITERATIONS, residual: res })
    }
}

/// `y(t) = Ṫ(t)E y₀ + T(t)(E y₁ + F y₀)` solves `Eÿ + Fẏ + Hy = 0`, `y(0) = y₀`, `ẏ(0) = y₁`.
pub fn solve_ivp(
    p: &QuadraticPencil,
    y0: &ComplexMatrix,
    y1: &ComplexMatrix,
    t: f64,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    Ok(solve_ivp_many(p, y0, y1, &[t], opts)?.remove(0))
}

pub fn solve_ivp_many(
    p: &QuadraticPencil,
    y0: &ComplexMatrix,
    y1: &ComplexMatrix,
    ts: &[f64],
    opts: &CalculusOptions,
) -> Result<Vec<ComplexMatrix>> {
    let n = p.dim();
    if y0.rows() != n || y1.shape() != y0.shape() {
        return Err(Error::ShapeMismatch(format!(
            "initial data must be {n}-row and of equal shape, got {:?} and {:?}",
            y0.shape(),
            y1.shape()
        )));
    }
    let ey0 = p.e.matmul(y0);
    let kick = p.e.matmul(y1) + p.f.matmul(y0);
    Ok(impulse_responses(p, ts, opts)?
        .into_iter()
        .map(|r| r.derivative.matmul(&ey0) + r.value.matmul(&kick))
        .collect())
}
