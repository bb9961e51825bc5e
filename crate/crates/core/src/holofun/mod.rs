//! Analytic functions of one and two complex variables.
//!
//! Functions are plain data (an expression tree over a small catalogue), so
//! derivatives and divided differences are exact closed forms rather than
//! numerical approximations wherever the catalogue allows.

mod kernel;
mod parse;
mod poly;

use std::fmt;

use num_complex::Complex64;

use crate::contour::{Disk, SpectralEnclosure};
use crate::error::{Error, Result};

pub use kernel::{HoloFun2, ShiftSign};
pub use parse::{parse_f1, parse_f2, parse_complex};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Threshold of the near-diagonal rule: below `τ·(1 + |λ| + |μ|)` the
/// difference quotient is replaced by the derivative at the midpoint.
pub const DD_TAU: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq)]
pub enum HoloFun1 {
    Const(Complex64),
    Id,
    Pow(u32),
    /// `e^{λt}`
    Exp { t: Complex64 },
    /// `λ e^{λt}`
    XExp { t: Complex64 },
    /// `1/(λ₀ − λ)`
    InvShift { l0: Complex64 },
    /// `1/(λ₀ − λ)ⁿ`
    InvShiftPow { l0: Complex64, n: u32 },
    /// Principal square root, cut along `(−∞, 0]`.
    Sqrt,
    /// Principal logarithm, cut along `(−∞, 0]`.
    Log,
    /// Coefficients, highest degree first.
    Poly(Vec<Complex64>),
    Rational { p: Vec<Complex64>, q: Vec<Complex64> },
    Sum(Box<HoloFun1>, Box<HoloFun1>),
    Product(Box<HoloFun1>, Box<HoloFun1>),
    Quotient(Box<HoloFun1>, Box<HoloFun1>),
    Scaled(Complex64, Box<HoloFun1>),
}

impl HoloFun1 {
    pub fn constant(c: f64) -> Self {
        Self::Const(Complex64::new(c, 0.0))
    }

    pub fn exp(t: f64) -> Self {
        Self::Exp { t: Complex64::new(t, 0.0) }
    }

    pub fn xexp(t: f64) -> Self {
        Self::XExp { t: Complex64::new(t, 0.0) }
    }

    pub fn inv_shift(l0: Complex64) -> Self {
        Self::InvShift { l0 }
    }

    /// `1/λ`
    pub fn reciprocal() -> Self {
        Self::Quotient(Box::new(Self::Const(ONE)), Box::new(Self::Id))
    }

    pub fn rational(p: Vec<Complex64>, q: Vec<Complex64>) -> Result<Self> {
        let q = poly::trim(q);
        if q.iter().all(|c| *c == ZERO) {
            return Err(Error::InvalidParams("rational denominator is identically zero".into()));
        }
        Ok(Self::Rational { p: poly::trim(p), q })
    }

    pub fn sum(self, other: Self) -> Self {
        Self::Sum(Box::new(self), Box::new(other))
    }

    pub fn product(self, other: Self) -> Self {
        Self::Product(Box::new(self), Box::new(other))
    }

    pub fn quotient(self, other: Self) -> Self {
        Self::Quotient(Box::new(self), Box::new(other))
    }

    pub fn scaled(self, s: Complex64) -> Self {
        Self::Scaled(s, Box::new(self))
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Const(c) => *c,
            Self::Id => z,
            Self::Pow(n) => z.powu(*n),
            Self::Exp { t } => (z * t).exp(),
            Self::XExp { t } => z * (z * t).exp(),
            Self::InvShift { l0 } => 1.0 / (l0 - z),
            Self::InvShiftPow { l0, n } => (1.0 / (l0 - z)).powu(*n),
            Self::Sqrt => z.sqrt(),
            Self::Log => z.ln(),
            Self::Poly(c) => poly::eval(c, z),
            Self::Rational { p, q } => poly::eval(p, z) / poly::eval(q, z),
            Self::Sum(a, b) => a.eval(z) + b.eval(z),
            Self::Product(a, b) => a.eval(z) * b.eval(z),
            Self::Quotient(a, b) => a.eval(z) / b.eval(z),
            Self::Scaled(s, a) => s * a.eval(z),
        }
    }

    /// Exact derivative as a new function.
    pub fn derivative(&self) -> HoloFun1 {
        match self {
            Self::Const(_) => Self::Const(ZERO),
            Self::Id => Self::Const(ONE),
            Self::Pow(0) => Self::Const(ZERO),
            Self::Pow(1) => Self::Const(ONE),
            Self::Pow(n) => Self::Pow(n - 1).scaled(Complex64::new(*n as f64, 0.0)),
            Self::Exp { t } => Self::Exp { t: *t }.scaled(*t),
            Self::XExp { t } => Self::Exp { t: *t }.sum(Self::XExp { t: *t }.scaled(*t)),
            Self::InvShift { l0 } => Self::InvShiftPow { l0: *l0, n: 2 },
            Self::InvShiftPow { l0, n } => {
                Self::InvShiftPow { l0: *l0, n: n + 1 }.scaled(Complex64::new(*n as f64, 0.0))
            }
            Self::Sqrt => Self::Const(Complex64::new(0.5, 0.0)).quotient(Self::Sqrt),
            Self::Log => Self::reciprocal(),
            Self::Poly(c) => Self::Poly(poly::derivative(c)),
            Self::Rational { p, q } => {
                let num = poly::sub(&poly::mul(&poly::derivative(p), q), &poly::mul(p, &poly::derivative(q)));
                Self::Rational { p: poly::trim(num), q: poly::mul(q, q) }
            }
            Self::Sum(a, b) => a.derivative().sum(b.derivative()),
            Self::Product(a, b) => {
                a.derivative().product((**b).clone()).sum((**a).clone().product(b.derivative()))
            }
            Self::Quotient(a, b) => {
                let num = a
                    .derivative()
                    .product((**b).clone())
                    .sum((**a).clone().product(b.derivative()).scaled(-ONE));
                num.quotient((**b).clone().product((**b).clone()))
            }
            Self::Scaled(s, a) => a.derivative().scaled(*s),
        }
    }

    pub fn deriv(&self, z: Complex64) -> Complex64 {
        match self {
            Self::Const(_) => ZERO,
            Self::Id => ONE,
            Self::Pow(0) => ZERO,
            Self::Pow(n) => *n as f64 * z.powu(n - 1),
            Self::Exp { t } => t * (z * t).exp(),
            Self::XExp { t } => (1.0 + t * z) * (z * t).exp(),
            Self::InvShift { l0 } => (1.0 / (l0 - z)).powu(2),
            Self::InvShiftPow { l0, n } => *n as f64 * (1.0 / (l0 - z)).powu(n + 1),
            Self::Sqrt => 0.5 / z.sqrt(),
            Self::Log => 1.0 / z,
            Self::Poly(c) => poly::eval(&poly::derivative(c), z),
            Self::Rational { p, q } => {
                let qz = poly::eval(q, z);
                (poly::eval(&poly::derivative(p), z) * qz - poly::eval(p, z) * poly::eval(&poly::derivative(q), z))
                    / (qz * qz)
            }
            Self::Sum(a, b) => a.deriv(z) + b.deriv(z),
            Self::Product(a, b) => a.deriv(z) * b.eval(z) + a.eval(z) * b.deriv(z),
            Self::Quotient(a, b) => {
                let bz = b.eval(z);
                (a.deriv(z) * bz - a.eval(z) * b.deriv(z)) / (bz * bz)
            }
            Self::Scaled(s, a) => s * a.deriv(z),
        }
    }

    /// `f^{[1]}(λ, μ)`: the difference quotient, `f′(λ)` on the diagonal.
    ///
    /// Catalogue entries use algebraically rearranged forms that do not cancel
    /// as `λ → μ`; anything else falls back to [`divided_difference_tau`].
    pub fn divided_difference(&self, l: Complex64, m: Complex64) -> Complex64 {
        match self {
            Self::Const(_) => ZERO,
            Self::Id => ONE,
            Self::Pow(n) => {
                let n = *n;
                if n == 0 {
                    return ZERO;
                }
                // Σ λ^{n−1−k} μ^k by Horner in λ
                let mut acc = ZERO;
                let mut mk = ONE;
                for _ in 0..n {
                    acc = acc * l + mk;
                    mk *= m;
                }
                acc
            }
            Self::Exp { t } => (m * t).exp() * t * phi1((l - m) * t),
            Self::XExp { t } => (l * t).exp() + m * (m * t).exp() * t * phi1((l - m) * t),
            Self::InvShift { l0 } => 1.0 / ((l0 - l) * (l0 - m)),
            Self::InvShiftPow { l0, n } => {
                let a = 1.0 / (l0 - l);
                let b = 1.0 / (l0 - m);
                let s: Complex64 = (0..*n).map(|k| a.powu(n - 1 - k) * b.powu(k)).sum();
                a * b * s
            }
            Self::Sqrt => {
                let s = l.sqrt() + m.sqrt();
                if s == ZERO {
                    divided_difference_tau(self, l, m)
                } else {
                    1.0 / s
                }
            }
            Self::Log => log_divided_difference(l, m),
            Self::Poly(c) => poly::divided_difference(c, l, m),
            Self::Rational { p, q } => {
                let (ql, qm) = (poly::eval(q, l), poly::eval(q, m));
                let beta = poly::divided_difference(p, l, m) * qm - poly::divided_difference(q, l, m) * poly::eval(p, m);
                beta / (ql * qm)
            }
            Self::Sum(a, b) => a.divided_difference(l, m) + b.divided_difference(l, m),
            Self::Product(g, h) => g.eval(l) * h.divided_difference(l, m) + g.divided_difference(l, m) * h.eval(m),
            Self::Quotient(g, h) => bezoutian(g, h, l, m) / (h.eval(l) * h.eval(m)),
            Self::Scaled(s, a) => s * a.divided_difference(l, m),
        }
    }

    /// Points (and possibly the negative real axis) where `f` is not analytic.
    pub fn singular_set(&self) -> SpectralEnclosure {
        let mut points = Vec::new();
        let mut cut = false;
        self.collect_singular(&mut points, &mut cut);
        let set = SpectralEnclosure::new(points.into_iter().map(Disk::point).collect());
        if cut {
            set.with_negative_axis()
        } else {
            set
        }
    }

    fn collect_singular(&self, points: &mut Vec<Complex64>, cut: &mut bool) {
        match self {
            Self::InvShift { l0 } | Self::InvShiftPow { l0, .. } => points.push(*l0),
            Self::Sqrt | Self::Log => *cut = true,
            Self::Rational { q, .. } => points.extend(poly::roots(q)),
            Self::Sum(a, b) | Self::Product(a, b) => {
                a.collect_singular(points, cut);
                b.collect_singular(points, cut);
            }
            Self::Quotient(a, b) => {
                a.collect_singular(points, cut);
                b.collect_singular(points, cut);
                if let Some(z) = b.zeros() {
                    points.extend(z);
                }
            }
            Self::Scaled(_, a) => a.collect_singular(points, cut),
            _ => {}
        }
    }

    /// Zeros of `f` when they are known in closed form.
    pub fn zeros(&self) -> Option<Vec<Complex64>> {
        match self {
            Self::Const(c) if *c != ZERO => Some(vec![]),
            Self::Id | Self::Sqrt => Some(vec![ZERO]),
            Self::Pow(0) => Some(vec![]),
            Self::Pow(_) => Some(vec![ZERO]),
            Self::Exp { .. } | Self::InvShift { .. } | Self::InvShiftPow { .. } => Some(vec![]),
            Self::XExp { .. } => Some(vec![ZERO]),
            Self::Log => Some(vec![ONE]),
            Self::Poly(c) => Some(poly::roots(c)),
            Self::Rational { p, .. } => Some(poly::roots(p)),
            Self::Product(a, b) => {
                let mut z = a.zeros()?;
                z.extend(b.zeros()?);
                Some(z)
            }
            Self::Scaled(s, a) if *s != ZERO => a.zeros(),
            _ => None,
        }
    }

    /// Canonical text form, parseable by [`parse_f1`].
    pub fn spec(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for HoloFun1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => write!(f, "const:c={}", fmt_complex(*c)),
            Self::Id => write!(f, "id"),
            Self::Pow(n) => write!(f, "pow:n={n}"),
            Self::Exp { t } => write!(f, "exp:t={}", fmt_complex(*t)),
            Self::XExp { t } => write!(f, "xexp:t={}", fmt_complex(*t)),
            Self::InvShift { l0 } => write!(f, "inv_shift:l0={}", fmt_complex(*l0)),
            Self::InvShiftPow { l0, n } => write!(f, "inv_shift_pow:l0={},n={n}", fmt_complex(*l0)),
            Self::Sqrt => write!(f, "sqrt"),
            Self::Log => write!(f, "log"),
            Self::Poly(c) => write!(f, "poly:{}", fmt_list(c)),
            Self::Rational { p, q } => write!(f, "rational:p={};q={}", fmt_list(p), fmt_list(q)),
            Self::Sum(a, b) => write!(f, "({a})+({b})"),
            Self::Product(a, b) => write!(f, "({a})*({b})"),
            Self::Quotient(a, b) => write!(f, "({a})/({b})"),
            Self::Scaled(s, a) => write!(f, "{}*({a})", fmt_complex(*s)),
        }
    }
}

pub(crate) fn fmt_complex(z: Complex64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.re == 0.0 {
        format!("{}i", z.im)
    } else if z.im < 0.0 {
        format!("{}{}i", z.re, z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

fn fmt_list(c: &[Complex64]) -> String {
    c.iter().map(|z| fmt_complex(*z)).collect::<Vec<_>>().join(",")
}

/// `(e^z − 1)/z`, by its Taylor series near 0.
fn phi1(z: Complex64) -> Complex64 {
    if z.norm() < 0.5 {
        let mut term = ONE;
        let mut sum = ONE;
        for k in 2..40 {
            term = term * z / k as f64;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
        }
        sum
    } else {
        (z.exp() - 1.0) / z
    }
}

fn log_divided_difference(l: Complex64, m: Complex64) -> Complex64 {
    if l == m {
        return 1.0 / l;
    }
    let u = (l - m) / m;
    if u.norm() < 0.5 {
        // Log(1 + u)/u = Σ (−u)^k/(k + 1)
        let mut sum = ZERO;
        let mut pow = ONE;
        for k in 0..80 {
            let term = pow / (k + 1) as f64;
            sum += term;
            if term.norm() < 1e-17 * sum.norm() {
                break;
            }
            pow *= -u;
        }
        sum / m
    } else {
        (l.ln() - m.ln()) / (l - m)
    }
}

/// Difference quotient with the midpoint-derivative switch for `|λ − μ| ≤ τ(1 + |λ| + |μ|)`.
pub fn divided_difference_tau(f: &HoloFun1, l: Complex64, m: Complex64) -> Complex64 {
    if (l - m).norm() <= DD_TAU * (1.0 + l.norm() + m.norm()) {
        f.deriv((l + m) * 0.5)
    } else {
        (f.eval(l) - f.eval(m)) / (l - m)
    }
}

/// `f^{[1]}(λ, μ)`.
pub fn divided_difference(f: &HoloFun1, l: Complex64, m: Complex64) -> Complex64 {
    f.divided_difference(l, m)
}

/// `β_{g,h}(λ, μ) = g^{[1]}(λ, μ) h(μ) − h^{[1]}(λ, μ) g(μ)`.
pub fn bezoutian(g: &HoloFun1, h: &HoloFun1, l: Complex64, m: Complex64) -> Complex64 {
    g.divided_difference(l, m) * h.eval(m) - h.divided_difference(l, m) * g.eval(m)
}
