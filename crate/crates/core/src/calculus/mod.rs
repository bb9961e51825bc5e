//! Contour-integral calculi: `f(A)`, the two-contour transformator
//! `(φ_A ⊠ φ_B) f` and the single-contour `(φ_A ⊡ φ_B) f`.
//!
//! Matrices are bounded, so the point at infinity is never in a spectrum and
//! every formula's `f(∞)` correction term is identically zero; none is computed.

mod exp_family;
mod nested;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::contour::{
    default_margin, envelope, integrate, integrate_fixed, Contour, Disk, EnclosureMode, QuadratureOptions,
    QuadratureResult, SpectralEnclosure,
};
use crate::error::{Error, Result};
use crate::holofun::{HoloFun1, HoloFun2};
use crate::numcore::{eigenvalues, resolvent, ComplexMatrix, Lu, TransformatorMatrix};

pub(crate) use exp_family::ExpFamily;
pub use nested::BoxtimesPlan;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalculusOptions {
    /// Relative quadrature tolerance.
    pub tol: f64,
    /// Enclosure disk radius; `None` picks `0.1·max(diam σ, 0.1(1 + ρ(σ)))`.
    pub margin: Option<f64>,
    pub start_nodes: usize,
    /// Largest node count per contour component.
    pub node_cap: usize,
    pub enclosure_mode: EnclosureMode,
    /// Relative residual accepted by the equation solvers.
    pub residual_tol: f64,
}

impl Default for CalculusOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            margin: None,
            start_nodes: 64,
            node_cap: 4096,
            enclosure_mode: EnclosureMode::Eigen,
            residual_tol: 1e-8,
        }
    }
}

impl CalculusOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidInput(format!("tol must be positive, got {}", self.tol)));
        }
        if let Some(m) = self.margin {
            if !(m > 0.0 && m.is_finite()) {
                return Err(Error::InvalidInput(format!("margin must be positive, got {m}")));
            }
        }
        if !self.node_cap.is_power_of_two() || self.node_cap < 64 {
            return Err(Error::InvalidInput(format!(
                "node_cap must be a power of two ≥ 64, got {}",
                self.node_cap
            )));
        }
        if !self.start_nodes.is_power_of_two() || self.start_nodes < 4 || self.start_nodes > self.node_cap {
            return Err(Error::InvalidInput(format!(
                "start_nodes must be a power of two in [4, node_cap], got {}",
                self.start_nodes
            )));
        }
        if !(self.residual_tol > 0.0) {
            return Err(Error::InvalidInput("residual_tol must be positive".into()));
        }
        Ok(())
    }

    pub fn quadrature(&self) -> QuadratureOptions {
        QuadratureOptions { tol: self.tol, start_nodes: self.start_nodes, node_cap: self.node_cap }
    }
}

/// Eigenvalues of `a` together with the disks enclosing them at the given scale of the margin.
pub(crate) struct Spectrum {
    pub eigs: Vec<Complex64>,
    gershgorin: Vec<Disk>,
    margin: f64,
}

impl Spectrum {
    pub fn of(a: &ComplexMatrix, opts: &CalculusOptions) -> Result<Self> {
        let n = a.ensure_square("operator")?;
        if !a.is_finite() {
            return Err(Error::NonFinite);
        }
        let eigs = eigenvalues(a)?;
        let margin = opts.margin.unwrap_or_else(|| default_margin(&eigs));
        let gershgorin = (0..n)
            .map(|i| {
                let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
                Disk::new(a[(i, i)], off)
            })
            .collect();
        Ok(Self { eigs, gershgorin, margin })
    }

    pub fn enclosure(&self, mode: EnclosureMode, shrink: f64) -> SpectralEnclosure {
        let r = self.margin * shrink;
        match mode {
            EnclosureMode::Gershgorin if !self.gershgorin.is_empty() => SpectralEnclosure::new(
                self.gershgorin.iter().map(|d| Disk::new(d.center, d.radius + r)).collect(),
            ),
            _ => SpectralEnclosure::from_points(&self.eigs, r),
        }
    }
}

/// Builds a contour via `build(shrink)`, halving the enclosure margin after
/// each separation failure (at most five retries).
pub(crate) fn with_shrinking<T>(mut build: impl FnMut(f64) -> Result<T>) -> Result<T> {
    let mut shrink = 1.0;
    let mut last = None;
    for _ in 0..6 {
        match build(shrink) {
            Ok(v) => return Ok(v),
            Err(e @ Error::CannotSeparate(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
        shrink *= 0.5;
    }
    Err(last.expect("at least one attempt"))
}

/// The contour `funm` integrates `f` over for the operator `a`.
pub(crate) fn funm_contour_of(f: &HoloFun1, a: &ComplexMatrix, opts: &CalculusOptions) -> Result<Contour> {
    funm_contour(f, &Spectrum::of(a, opts)?, opts)
}

fn funm_contour(f: &HoloFun1, spec: &Spectrum, opts: &CalculusOptions) -> Result<Contour> {
    let avoid = f.singular_set();
    with_shrinking(|s| envelope(&spec.enclosure(opts.enclosure_mode, s), &avoid))
}

fn scaled_resolvent(f: &HoloFun1, a: &ComplexMatrix, z: Complex64) -> Result<ComplexMatrix> {
    Ok(resolvent(a, z)?.scale(f.eval(z)))
}

/// `f(A) = (1/2πi)∮ f(λ)(λI − A)⁻¹ dλ` with quadrature diagnostics.
pub fn funm_result(f: &HoloFun1, a: &ComplexMatrix, opts: &CalculusOptions) -> Result<QuadratureResult> {
    opts.validate()?;
    let spec = Spectrum::of(a, opts)?;
    let contour = funm_contour(f, &spec, opts)?;
    integrate(&contour, &opts.quadrature(), |z| scaled_resolvent(f, a, z))
}

pub fn funm(f: &HoloFun1, a: &ComplexMatrix, opts: &CalculusOptions) -> Result<ComplexMatrix> {
    Ok(funm_result(f, a, opts)?.value)
}

/// `f(A)` on the automatic contour with exactly `nodes` nodes per component.
pub fn funm_fixed(f: &HoloFun1, a: &ComplexMatrix, nodes: usize, opts: &CalculusOptions) -> Result<ComplexMatrix> {
    opts.validate()?;
    let spec = Spectrum::of(a, opts)?;
    let contour = funm_contour(f, &spec, opts)?.with_nodes(nodes)?;
    integrate_fixed(&contour, |z| scaled_resolvent(f, a, z))
}

/// `f(A)` on a caller-supplied contour.
pub fn funm_on(f: &HoloFun1, a: &ComplexMatrix, contour: &Contour, opts: &CalculusOptions) -> Result<QuadratureResult> {
    opts.validate()?;
    a.ensure_square("operator")?;
    integrate(contour, &opts.quadrature(), |z| scaled_resolvent(f, a, z))
}

fn check_triple(a: &ComplexMatrix, b: &ComplexMatrix, c: &ComplexMatrix) -> Result<(usize, usize)> {
    let n = a.ensure_square("left operator")?;
    let m = b.ensure_square("right operator")?;
    if c.shape() != (n, m) {
        return Err(Error::ShapeMismatch(format!("C is {:?}, expected {n}x{m}", c.shape())));
    }
    if !c.is_finite() {
        return Err(Error::NonFinite);
    }
    Ok((n, m))
}

/// `(1/(2πi)²)∮∮ f(λ, μ) R_{A,λ} C R_{B,μ} dμ dλ` with diagnostics.
pub fn boxtimes_result(
    f: &HoloFun2,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<QuadratureResult> {
    check_triple(a, b, c)?;
    let (_, result) = BoxtimesPlan::build(f, a, b, c, opts)?;
    Ok(result)
}

pub fn boxtimes(
    f: &HoloFun2,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    Ok(boxtimes_result(f, a, b, c, opts)?.value)
}

/// Envelope of `σ(A) ∪ σ(B)` avoiding the singularities of `f`.
fn union_contour(f: &HoloFun1, sa: &Spectrum, sb: &Spectrum, opts: &CalculusOptions) -> Result<Contour> {
    let avoid = f.singular_set();
    with_shrinking(|s| {
        let inside = sa.enclosure(opts.enclosure_mode, s).union(&sb.enclosure(opts.enclosure_mode, s));
        envelope(&inside, &avoid)
    })
}

/// `(1/2πi)∮ f(λ) R_{A,λ} C R_{B,λ} dλ` with diagnostics.
pub fn boxdot_result(
    f: &HoloFun1,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<QuadratureResult> {
    opts.validate()?;
    check_triple(a, b, c)?;
    let sa = Spectrum::of(a, opts)?;
    let sb = Spectrum::of(b, opts)?;
    let contour = union_contour(f, &sa, &sb, opts)?;
    integrate(&contour, &opts.quadrature(), |z| {
        let ra = resolvent(a, z)?;
        let rb = resolvent(b, z)?;
        Ok(ra.matmul(c).matmul(&rb).scale(f.eval(z)))
    })
}

pub fn boxdot(
    f: &HoloFun1,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    Ok(boxdot_result(f, a, b, c, opts)?.value)
}

/// Materializes `(φ_A ⊠ φ_B) f` as an `(n·m)×(n·m)` matrix acting on `vec C`.
pub fn transformator_matrix(
    f: &HoloFun2,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<TransformatorMatrix> {
    let n = a.ensure_square("left operator")?;
    let m = b.ensure_square("right operator")?;
    // converge on a probe with every entry active, then reuse the nodes for the basis
    let probe = ComplexMatrix::from_fn(n, m, |i, j| Complex64::new(1.0 + 0.1 * i as f64, 0.1 * j as f64));
    let (plan, _) = BoxtimesPlan::build(f, a, b, &probe, opts)?;
    let mut lift = ComplexMatrix::zeros(n * m, n * m);
    for col in 0..n * m {
        let mut e = ComplexMatrix::zeros(n, m);
        e[(col % n, col / n)] = Complex64::new(1.0, 0.0);
        lift.set_column(col, &plan.apply(&e)?.vec());
    }
    TransformatorMatrix::from_lift(n, m, lift)
}

/// `{f(λᵢ, μⱼ)}` over all eigenvalue pairs, `i` outer. Fails when the kernel
/// is singular at one of the pairs.
pub fn transformator_spectrum(f: &HoloFun2, a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Vec<Complex64>> {
    let ea = eigenvalues(a)?;
    let eb = eigenvalues(b)?;
    if *f == HoloFun2::SylvesterW {
        let scale = 1.0 + ea.iter().chain(&eb).map(|z| z.norm()).fold(0.0, f64::max);
        let distance = ea
            .iter()
            .flat_map(|l| eb.iter().map(move |m| (l - m).norm()))
            .fold(f64::INFINITY, f64::min);
        if distance <= 1e-8 * scale {
            return Err(Error::SpectraOverlap { distance });
        }
    }
    let values: Vec<Complex64> = ea.iter().flat_map(|&l| eb.iter().map(move |&m| f.eval2(l, m))).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::CannotSeparate(format!("kernel {f} is singular at an eigenvalue pair")));
    }
    Ok(values)
}

/// `f((φ_A ⊠ φ_B) g)` applied to `C`, as a contour integral of the resolvent
/// of the lifted transformator around its spectrum.
pub fn compose_apply(
    f: &HoloFun1,
    g: &HoloFun2,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    opts.validate()?;
    let (n, m) = check_triple(a, b, c)?;
    let lift = transformator_matrix(g, a, b, opts)?.into_lift();
    let values = transformator_spectrum(g, a, b)?;
    let diam = SpectralEnclosure::from_points(&values, 0.0).diameter();
    let margin = if diam > 0.0 { 0.1 * diam } else { default_margin(&values) };
    let avoid = f.singular_set();
    let contour = with_shrinking(|s| envelope(&SpectralEnclosure::from_points(&values, margin * s), &avoid))?;
    let vc = c.vec();
    let r = integrate(&contour, &opts.quadrature(), |nu| {
        let lu = Lu::factor(&lift.scale_real(-1.0).shift(nu)).map_err(|_| Error::NuInSpectrum(nu))?;
        Ok(lu.solve(&vc)?.scale(f.eval(nu)))
    })?;
    ComplexMatrix::unvec(&r.value, n, m)
}

/// `S_ν C = (φ_A ⊠ φ_B)(1/(ν − f)) C`.
pub fn transformator_resolvent(
    f: &HoloFun2,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    nu: Complex64,
    c: &ComplexMatrix,
    opts: &CalculusOptions,
) -> Result<ComplexMatrix> {
    check_triple(a, b, c)?;
    check_nu(f, a, b, nu)?;
    boxtimes(&HoloFun2::composed(HoloFun1::inv_shift(nu), f.clone()), a, b, c, opts)
}

/// Lift of `S_ν`.
pub fn transformator_resolvent_matrix(
    f: &HoloFun2,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    nu: Complex64,
    opts: &CalculusOptions,
) -> Result<TransformatorMatrix> {
    check_nu(f, a, b, nu)?;
    transformator_matrix(&HoloFun2::composed(HoloFun1::inv_shift(nu), f.clone()), a, b, opts)
}

fn check_nu(f: &HoloFun2, a: &ComplexMatrix, b: &ComplexMatrix, nu: Complex64) -> Result<()> {
    let values = transformator_spectrum(f, a, b)?;
    let scale = 1.0 + values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    if values.iter().any(|v| (v - nu).norm() <= 1e-6 * scale) {
        return Err(Error::NuInSpectrum(nu));
    }
    Ok(())
}
