//! Sylvester `AZ − ZB = C` and Stein `Z − AZB = C` equations, and the
//! differential of a Riccati solution.
//!
//! Every backend realizes the same transformator `Q = (φ_A ⊠ φ_B) w` with
//! `w(λ, μ) = 1/(λ − μ)`, so `Q(C)` solves `AZ − ZB = C`; each result is
//! certified by its residual before it is returned.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::calculus::{boxtimes_result, with_shrinking, CalculusOptions, ExpFamily};
use crate::contour::{default_margin, envelope, integrate, Contour, QuadratureResult, SpectralEnclosure};
use crate::error::{Error, Result};
use crate::gauss;
use crate::holofun::HoloFun2;
use crate::numcore::{eigenvalues, inverse, resolvent, ComplexMatrix, Lu};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SylvesterMethod {
    /// `(1/2πi)∮_{Γ_A} R_{A,λ} C R_{B,λ} dλ`, `Γ_A` enclosing `σ(A)` only.
    #[default]
    Contour,
    /// `−∫₀^∞ e^{At} C e^{−Bt} dt`.
    ExpIntegral,
    /// `−Σ Aⁿ C B^{−(n+1)}`.
    Series,
    /// Dense solve of the Kronecker-lifted system.
    KronOracle,
    /// `½(∮_{Γ_A} − ∮_{Γ_B}) R_{A,λ} C R_{B,λ} dλ`.
    SignForm,
}

impl FromStr for SylvesterMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "contour" => Ok(Self::Contour),
            "exp-integral" | "exp_integral" => Ok(Self::ExpIntegral),
            "series" => Ok(Self::Series),
            "kron" | "kron-oracle" | "kron_oracle" => Ok(Self::KronOracle),
            "sign-form" | "sign_form" => Ok(Self::SignForm),
            _ => Err(Error::Parse(format!("unknown Sylvester method `{s}`"))),
        }
    }
}

impl fmt::Display for SylvesterMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Contour => "contour",
            Self::ExpIntegral => "exp-integral",
            Self::Series => "series",
            Self::KronOracle => "kron",
            Self::SignForm => "sign-form",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SteinMethod {
    #[default]
    Boxtimes,
    KronOracle,
}

impl FromStr for SteinMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "boxtimes" | "contour" => Ok(Self::Boxtimes),
            "kron" | "kron-oracle" | "kron_oracle" => Ok(Self::KronOracle),
            _ => Err(Error::Parse(format!("unknown Stein method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SylvesterProblem {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
}

impl SylvesterProblem {
    pub fn new(a: ComplexMatrix, b: ComplexMatrix, c: ComplexMatrix) -> Result<Self> {
        let n = a.ensure_square("A")?;
        let m = b.ensure_square("B")?;
        if c.shape() != (n, m) {
            return Err(Error::ShapeMismatch(format!("C is {:?}, expected {n}x{m}", c.shape())));
        }
        Ok(Self { a, b, c })
    }

    /// `‖AZ − ZB − C‖_F`.
    pub fn residual(&self, z: &ComplexMatrix) -> f64 {
        (self.a.matmul(z) - z.matmul(&self.b) - self.c.clone()).norm_fro()
    }

    /// `‖Z − AZB − C‖_F`.
    pub fn stein_residual(&self, z: &ComplexMatrix) -> f64 {
        (z - &self.a.matmul(z).matmul(&self.b) - self.c.clone()).norm_fro()
    }
}

/// A solution that passed its residual check.
#[derive(Debug, Clone)]
pub struct Certified {
    pub z: ComplexMatrix,
    /// Residual relative to `‖C‖_F`.
    pub relative_residual: f64,
    /// Quadrature nodes per component, or series terms, where meaningful.
    pub nodes_used: Option<usize>,
    pub error_estimate: Option<f64>,
}

fn certify(
    residual: f64,
    c_norm: f64,
    z: ComplexMatrix,
    opts: &CalculusOptions,
    nodes_used: Option<usize>,
    error_estimate: Option<f64>,
) -> Result<Certified> {
    let tolerance = opts.residual_tol * c_norm;
    if !(residual <= tolerance) && residual > 0.0 {
        return Err(Error::ResidualCheckFailed { residual: residual / c_norm.max(f64::MIN_POSITIVE), tolerance: opts.residual_tol });
    }
    let relative_residual = if c_norm > 0.0 { residual / c_norm } else { 0.0 };
    Ok(Certified { z, relative_residual, nodes_used, error_estimate })
}

fn min_pair_distance(x: &[Complex64], y: &[Complex64]) -> f64 {
    x.iter()
        .flat_map(|a| y.iter().map(move |b| (a - b).norm()))
        .fold(f64::INFINITY, f64::min)
}

fn spectra(p: &SylvesterProblem) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if !(p.a.is_finite() && p.b.is_finite() && p.c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let ea = eigenvalues(&p.a)?;
    let eb = eigenvalues(&p.b)?;
    let scale = 1.0 + ea.iter().chain(&eb).map(|z| z.norm()).fold(0.0, f64::max);
    let distance = min_pair_distance(&ea, &eb);
    if distance <= 1e-8 * scale {
        return Err(Error::SpectraOverlap { distance });
    }
    Ok((ea, eb))
}

/// Envelope of `own` that keeps `other` outside, shrinking margins as needed.
fn separating_contour(own: &[Complex64], other: &[Complex64], opts: &CalculusOptions) -> Result<Contour> {
    let d = min_pair_distance(own, other);
    // margins large enough for a tidy contour but always leaving a gap between the two sets
    let base = opts.margin.unwrap_or_else(|| default_margin(own).min(0.25 * d));
    let avoid_margin = opts.margin.unwrap_or_else(|| default_margin(other).min(0.25 * d));
    with_shrinking(|s| {
        envelope(
            &SpectralEnclosure::from_points(own, base * s),
            &SpectralEnclosure::from_points(other, avoid_margin * s),
        )
    })
}

fn sandwich_integral(p: &SylvesterProblem, contour: &Contour, opts: &CalculusOptions) -> Result<QuadratureResult> {
    integrate(contour, &opts.quadrature(), |z| {
        Ok(resolvent(&p.a, z)?.matmul(&p.c).matmul(&resolvent(&p.b, z)?))
    })
}

/// Solves `AZ − ZB = C` with the chosen backend and certifies the residual.
pub fn solve_sylvester(p: &SylvesterProblem, method: SylvesterMethod, opts: &CalculusOptions) -> Result<Certified> {
    opts.validate()?;
    let (ea, eb) = spectra(p)?;
    let c_norm = p.c.norm_fro();
    if c_norm == 0.0 {
        return certify(0.0, 0.0, ComplexMatrix::zeros(p.c.rows(), p.c.cols()), opts, None, None);
    }
    // the solution map is linear; a unit right-hand side keeps the quadrature
    // tolerances relative to ‖C‖
    let unit = SylvesterProblem { a: p.a.clone(), b: p.b.clone(), c: p.c.scale_real(1.0 / c_norm) };
    let (z, nodes, est) = solve_unit(&unit, method, &ea, &eb, opts)?;
    let z = z.scale_real(c_norm);
    certify(p.residual(&z), c_norm, z, opts, nodes, est.map(|e| e * c_norm))
}

fn solve_unit(
    p: &SylvesterProblem,
    method: SylvesterMethod,
    ea: &[Complex64],
    eb: &[Complex64],
    opts: &CalculusOptions,
) -> Result<(ComplexMatrix, Option<usize>, Option<f64>)> {
    Ok(match method {
        SylvesterMethod::Contour => {
            let gamma = separating_contour(ea, eb, opts)?;
            let r = sandwich_integral(p, &gamma, opts)?;
            (r.value, Some(r.nodes_used), Some(r.error_estimate))
        }
        SylvesterMethod::SignForm => {
            let s = sign_form_parts(p, ea, eb, opts)?;
            let z = (s.around_a.value.clone() - s.around_b.value.clone()).scale_real(0.5);
            let nodes = s.around_a.nodes_used.max(s.around_b.nodes_used);
            (z, Some(nodes), Some(s.around_a.error_estimate + s.around_b.error_estimate))
        }
        SylvesterMethod::ExpIntegral => {
            let (z, nodes) = exp_integral(p, ea, eb, opts)?;
            (z, Some(nodes), None)
        }
        SylvesterMethod::Series => {
            let (z, terms) = series(p, ea, eb, opts)?;
            (z, Some(terms), None)
        }
        SylvesterMethod::KronOracle => (kron_sylvester(&p.a, &p.b, &p.c)?, None, None),
    })
}

/// The two single-contour integrals of the sign form.
#[derive(Debug, Clone)]
pub struct SignFormParts {
    /// `(1/2πi)∮_{Γ_A} R_{A,λ} C R_{B,λ} dλ`
    pub around_a: QuadratureResult,
    /// `(1/2πi)∮_{Γ_B} R_{A,λ} C R_{B,λ} dλ`
    pub around_b: QuadratureResult,
}

fn sign_form_parts(
    p: &SylvesterProblem,
    ea: &[Complex64],
    eb: &[Complex64],
    opts: &CalculusOptions,
) -> Result<SignFormParts> {
    let ga = separating_contour(ea, eb, opts)?;
    let gb = separating_contour(eb, ea, opts)?;
    Ok(SignFormParts { around_a: sandwich_integral(p, &ga, opts)?, around_b: sandwich_integral(p, &gb, opts)? })
}

/// Both contour pieces of the sign form; their sum vanishes and half their
/// difference is `Q(C)`.
pub fn sign_form_parts_of(p: &SylvesterProblem, opts: &CalculusOptions) -> Result<SignFormParts> {
    opts.validate()?;
    let (ea, eb) = spectra(p)?;
    sign_form_parts(p, &ea, &eb, opts)
}

/// `Q(C)` through the sign-function form, certified.
pub fn q_apply_sign_form(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    let p = SylvesterProblem::new(a.clone(), b.clone(), c.clone())?;
    Ok(solve_sylvester(&p, SylvesterMethod::SignForm, opts)?.z)
}

/// `(Iₘ⊗A − Bᵀ⊗Iₙ) vec Z = vec C`.
pub fn kron_sylvester(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<ComplexMatrix> {
    let (n, m) = (a.rows(), b.rows());
    let op = ComplexMatrix::identity(m).kron(a) - b.transpose().kron(&ComplexMatrix::identity(n));
    let v = Lu::factor(&op)
        .map_err(|_| Error::SpectraOverlap { distance: 0.0 })?
        .solve(&c.vec())?;
    ComplexMatrix::unvec(&v, n, m)
}

fn exp_integral(
    p: &SylvesterProblem,
    ea: &[Complex64],
    eb: &[Complex64],
    opts: &CalculusOptions,
) -> Result<(ComplexMatrix, usize)> {
    let max_re_a = ea.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min_re_b = eb.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let g = min_re_b - max_re_a;
    if !(g > 0.0) {
        return Err(Error::MethodNotApplicable(format!(
            "exp-integral needs max Re σ(A) < min Re σ(B); gap is {g:.3e}"
        )));
    }
    let c_norm = p.c.norm_fro();
    if c_norm == 0.0 {
        return Ok((ComplexMatrix::zeros(p.c.rows(), p.c.cols()), 0));
    }
    let horizon = ((c_norm / (opts.tol * g)).ln() / g).max(1.0 / g);
    // shift both operators by the midpoint so each factor decays on its own
    let rho = 0.5 * (max_re_a + min_re_b);
    let a_s = p.a.shift(Complex64::new(-rho, 0.0));
    let b_s = p.b.shift(Complex64::new(-rho, 0.0));
    let probes = [0.0, 0.25 * horizon, 0.5 * horizon, horizon];
    let fa = ExpFamily::converge(&a_s, 1.0, &probes, opts)?;
    let fb = ExpFamily::converge(&b_s, -1.0, &probes, opts)?;
    let rule = gauss::composite(0.0, horizon, 32, 8);
    let terms: Vec<ComplexMatrix> = rule
        .par_iter()
        .map(|&(t, w)| fa.at(t, 1).matmul(&p.c).matmul(&fb.at(t, 1)).scale_real(w))
        .collect();
    let mut z = ComplexMatrix::zeros(p.c.rows(), p.c.cols());
    for t in &terms {
        z -= t;
    }
    Ok((z, fa.len().max(fb.len())))
}

fn series(
    p: &SylvesterProblem,
    ea: &[Complex64],
    eb: &[Complex64],
    opts: &CalculusOptions,
) -> Result<(ComplexMatrix, usize)> {
    let rho_a = ea.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let min_b = eb.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if !(rho_a < min_b) {
        return Err(Error::MethodNotApplicable(format!(
            "series needs max|σ(A)| < min|σ(B)|; got {rho_a:.3e} and {min_b:.3e}"
        )));
    }
    let b_inv = inverse(&p.b).map_err(|_| Error::MethodNotApplicable("series needs B invertible".into()))?;
    let mut term = p.c.matmul(&b_inv);
    let mut z = term.clone();
    let mut prev = term.norm_fro();
    let mut growing = 0;
    for k in 1..=10_000 {
        term = p.a.matmul(&term).matmul(&b_inv);
        z += &term;
        let size = term.norm_fro();
        if !size.is_finite() {
            return Err(Error::DivergenceDetected(k));
        }
        if size < opts.tol * z.norm_fro() || size == 0.0 {
            return Ok((z.scale_real(-1.0), k + 1));
        }
        growing = if size > prev { growing + 1 } else { 0 };
        if growing >= 10 {
            return Err(Error::DivergenceDetected(k));
        }
        prev = size;
    }
    Err(Error::NoConvergence { iterations: 10_000 })
}

/// Solves `Z − AZB = C`.
pub fn solve_stein(p: &SylvesterProblem, method: SteinMethod, opts: &CalculusOptions) -> Result<Certified> {
    opts.validate()?;
    if !(p.a.is_finite() && p.b.is_finite() && p.c.is_finite()) {
        return Err(Error::NonFinite);
    }
    let ea = eigenvalues(&p.a)?;
    let eb = eigenvalues(&p.b)?;
    let distance = ea
        .iter()
        .flat_map(|l| eb.iter().map(move |m| (1.0 - l * m).norm()))
        .fold(f64::INFINITY, f64::min);
    if distance <= 1e-8 {
        return Err(Error::ProductSpectrumHitsOne { distance });
    }
    let c_norm = p.c.norm_fro();
    if c_norm == 0.0 {
        return certify(0.0, 0.0, ComplexMatrix::zeros(p.c.rows(), p.c.cols()), opts, None, None);
    }
    let (z, nodes, est) = match method {
        SteinMethod::Boxtimes => {
            let unit = p.c.scale_real(1.0 / c_norm);
            let r = boxtimes_result(&HoloFun2::SteinS, &p.a, &p.b, &unit, opts)?;
            let r = QuadratureResult { value: r.value.scale_real(c_norm), error_estimate: r.error_estimate * c_norm, ..r };
            (r.value, Some(r.nodes_used), Some(r.error_estimate))
        }
        SteinMethod::KronOracle => {
            let (n, m) = (p.a.rows(), p.b.rows());
            let op = ComplexMatrix::identity(n * m) - p.b.transpose().kron(&p.a);
            let v = Lu::factor(&op)
                .map_err(|_| Error::ProductSpectrumHitsOne { distance })?
                .solve(&p.c.vec())?;
            (ComplexMatrix::unvec(&v, n, m)?, None, None)
        }
    };
    certify(p.stein_residual(&z), c_norm, z, opts, nodes, est)
}

/// Coefficients of the Riccati equation `AZ + ZB + ZCZ + D = 0`.
#[derive(Debug, Clone)]
pub struct Riccati {
    pub a: ComplexMatrix,
    pub b: ComplexMatrix,
    pub c: ComplexMatrix,
    pub d: ComplexMatrix,
}

impl Riccati {
    pub fn residual(&self, z: &ComplexMatrix) -> ComplexMatrix {
        self.a.matmul(z) + z.matmul(&self.b) + z.matmul(&self.c).matmul(z) + self.d.clone()
    }

    fn scale(&self, z: &ComplexMatrix) -> f64 {
        let nz = z.norm_fro();
        self.a.norm_fro() * nz + nz * self.b.norm_fro() + nz * nz * self.c.norm_fro() + self.d.norm_fro()
    }
}

/// `dZ = Q_{A+ZC, −B−CZ}(−ΔD − ΔA Z − Z ΔB − Z ΔC Z)` for a solution `Z`.
pub fn riccati_differential(
    eq: &Riccati,
    z: &ComplexMatrix,
    delta: &Riccati,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    let res = eq.residual(z).norm_fro();
    if res > opts.residual_tol * eq.scale(z) {
        return Err(Error::NotASolution { residual: res });
    }
    let left = &eq.a + &z.matmul(&eq.c);
    let right = -(&eq.b + &eq.c.matmul(z));
    let rhs = -(delta.d.clone() + delta.a.matmul(z) + z.matmul(&delta.b) + z.matmul(&delta.c).matmul(z));
    if rhs.norm_fro() == 0.0 {
        return Ok(ComplexMatrix::zeros(z.rows(), z.cols()));
    }
    let p = SylvesterProblem::new(left, right, rhs)?;
    Ok(solve_sylvester(&p, SylvesterMethod::Contour, opts)?.z)
}
