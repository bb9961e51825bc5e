use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;

use super::{bezoutian, fmt_complex, HoloFun1};
use crate::contour::{Disk, SpectralEnclosure};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ShiftSign {
    /// `1/(ν₀ − λ − μ)`
    Plus,
    /// `1/(ν₀ − λ + μ)`
    Minus,
}

impl ShiftSign {
    fn factor(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

/// Analytic functions of two variables `(λ, μ)`; `λ` pairs with the left
/// operator and `μ` with the right one.
#[derive(Debug, Clone, PartialEq)]
pub enum HoloFun2 {
    /// `g(λ) h(μ)`
    Separable(HoloFun1, HoloFun1),
    /// `1/(λ − μ)`
    SylvesterW,
    /// `1/(1 − λμ)`
    SteinS,
    /// `1/(ν₀ − λ ∓ μ)`
    ShiftResolvent { nu0: Complex64, sign: ShiftSign },
    /// `λ − μ`
    Diff,
    /// `λ + μ`
    Sum,
    /// `f^{[1]}(λ, μ)`
    DividedDifference(HoloFun1),
    /// `β_{g,h}(λ, μ)`
    Bezoutian(HoloFun1, HoloFun1),
    /// `f(g(λ, μ))`
    Composed(HoloFun1, Box<HoloFun2>),
}

impl HoloFun2 {
    /// `f ∘ g`, rewritten to a closed-form kernel when one exists.
    pub fn composed(f: HoloFun1, g: HoloFun2) -> Self {
        match (&f, &g) {
            (HoloFun1::Id, _) => g,
            (HoloFun1::InvShift { l0 }, HoloFun2::Diff) => Self::ShiftResolvent { nu0: *l0, sign: ShiftSign::Minus },
            (HoloFun1::InvShift { l0 }, HoloFun2::Sum) => Self::ShiftResolvent { nu0: *l0, sign: ShiftSign::Plus },
            _ => Self::Composed(f, Box::new(g)),
        }
    }

    pub fn eval2(&self, l: Complex64, m: Complex64) -> Complex64 {
        match self {
            Self::Separable(g, h) => g.eval(l) * h.eval(m),
            Self::SylvesterW => 1.0 / (l - m),
            Self::SteinS => 1.0 / (1.0 - l * m),
            Self::ShiftResolvent { nu0, sign } => 1.0 / (nu0 - l - sign.factor() * m),
            Self::Diff => l - m,
            Self::Sum => l + m,
            Self::DividedDifference(f) => f.divided_difference(l, m),
            Self::Bezoutian(g, h) => bezoutian(g, h, l, m),
            Self::Composed(f, g) => f.eval(g.eval2(l, m)),
        }
    }

    /// Values of `λ` at which the kernel fails to be analytic for some `μ` in `right`.
    pub fn left_singular(&self, right: &SpectralEnclosure) -> SpectralEnclosure {
        match self {
            Self::Separable(g, _) => g.singular_set(),
            Self::SylvesterW => SpectralEnclosure::new(right.disks().to_vec()),
            Self::SteinS => SpectralEnclosure::new(right.disks().iter().filter_map(invert_disk).collect()),
            Self::ShiftResolvent { nu0, sign } => SpectralEnclosure::new(
                right
                    .disks()
                    .iter()
                    .map(|d| Disk::new(nu0 - sign.factor() * d.center, d.radius))
                    .collect(),
            ),
            Self::Diff | Self::Sum => SpectralEnclosure::empty(),
            Self::DividedDifference(f) => f.singular_set(),
            Self::Bezoutian(g, h) => g.singular_set().union(&h.singular_set()),
            Self::Composed(_, g) => g.left_singular(right),
        }
    }

    /// Values of `μ` at which the kernel fails to be analytic for some `λ` in `left`.
    pub fn right_singular(&self, left: &SpectralEnclosure) -> SpectralEnclosure {
        match self {
            Self::Separable(_, h) => h.singular_set(),
            Self::SylvesterW => SpectralEnclosure::new(left.disks().to_vec()),
            Self::SteinS => SpectralEnclosure::new(left.disks().iter().filter_map(invert_disk).collect()),
            Self::ShiftResolvent { nu0, sign } => SpectralEnclosure::new(
                left.disks()
                    .iter()
                    .map(|d| Disk::new((nu0 - d.center) * sign.factor(), d.radius))
                    .collect(),
            ),
            Self::Diff | Self::Sum => SpectralEnclosure::empty(),
            Self::DividedDifference(f) => f.singular_set(),
            Self::Bezoutian(g, h) => g.singular_set().union(&h.singular_set()),
            Self::Composed(_, g) => g.right_singular(left),
        }
    }

    /// How far the closed bidisk `da × db` stays from the singular set, as a
    /// ratio to the radius of the relevant range disk. Negative means the
    /// kernel is (or may be) singular on the bidisk; `∞` means entire.
    pub fn separation(&self, da: &Disk, db: &Disk) -> f64 {
        match self {
            Self::Separable(g, h) => ratio_to_set(&g.singular_set(), da).min(ratio_to_set(&h.singular_set(), db)),
            Self::SylvesterW => ratio_to_point(Complex64::new(0.0, 0.0), da.center - db.center, da.radius + db.radius),
            Self::SteinS => {
                let r = da.center.norm() * db.radius + db.center.norm() * da.radius + da.radius * db.radius;
                ratio_to_point(Complex64::new(1.0, 0.0), da.center * db.center, r)
            }
            Self::ShiftResolvent { nu0, sign } => {
                ratio_to_point(*nu0, da.center + sign.factor() * db.center, da.radius + db.radius)
            }
            Self::Diff | Self::Sum => f64::INFINITY,
            Self::DividedDifference(f) => {
                let s = f.singular_set();
                ratio_to_set(&s, da).min(ratio_to_set(&s, db))
            }
            Self::Bezoutian(g, h) => {
                let s = g.singular_set().union(&h.singular_set());
                ratio_to_set(&s, da).min(ratio_to_set(&s, db))
            }
            Self::Composed(f, g) => {
                let inner = g.separation(da, db);
                if inner <= 0.0 {
                    return inner;
                }
                let range = g.range_disk(da, db);
                inner.min(ratio_to_set(&f.singular_set(), &range))
            }
        }
    }

    /// Disk containing `g(da × db)`, from the values on the distinguished
    /// boundary (maximum modulus) with a 25% allowance for sampling.
    pub fn range_disk(&self, da: &Disk, db: &Disk) -> Disk {
        let center = self.eval2(da.center, db.center);
        let k = 16;
        let mut r: f64 = 0.0;
        for i in 0..k {
            let l = da.center + da.radius * Complex64::from_polar(1.0, 2.0 * PI * i as f64 / k as f64);
            for j in 0..k {
                let m = db.center + db.radius * Complex64::from_polar(1.0, 2.0 * PI * (j as f64 + 0.5) / k as f64);
                r = r.max((self.eval2(l, m) - center).norm());
            }
        }
        Disk::new(center, 1.25 * r)
    }
}

fn invert_disk(d: &Disk) -> Option<Disk> {
    let c2 = d.center.norm_sqr();
    let r2 = d.radius * d.radius;
    if c2 <= r2 {
        return None;
    }
    Some(Disk::new(d.center.conj() / (c2 - r2), d.radius / (c2 - r2)))
}

fn ratio_to_point(p: Complex64, center: Complex64, radius: f64) -> f64 {
    let d = (p - center).norm();
    if radius == 0.0 {
        return if d > 0.0 { f64::INFINITY } else { -1.0 };
    }
    d / radius - 1.0
}

fn ratio_to_set(set: &SpectralEnclosure, disk: &Disk) -> f64 {
    let mut best = f64::INFINITY;
    for s in set.disks() {
        best = best.min(ratio_to_point(s.center, disk.center, disk.radius + s.radius));
    }
    if set.includes_negative_axis() {
        let g = Disk::point(disk.center).gap_to_negative_axis();
        best = best.min(if disk.radius == 0.0 {
            if g > 0.0 { f64::INFINITY } else { -1.0 }
        } else {
            g / disk.radius - 1.0
        });
    }
    best
}

impl fmt::Display for HoloFun2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Separable(g, h) => write!(f, "sep({g}|{h})"),
            Self::SylvesterW => write!(f, "kernel:sylvester_w"),
            Self::SteinS => write!(f, "kernel:stein_s"),
            Self::ShiftResolvent { nu0, sign } => write!(
                f,
                "kernel:shift_resolvent:nu0={},sign={}",
                fmt_complex(*nu0),
                if *sign == ShiftSign::Plus { "+" } else { "-" }
            ),
            Self::Diff => write!(f, "kernel:diff"),
            Self::Sum => write!(f, "kernel:sum"),
            Self::DividedDifference(g) => write!(f, "dd({g})"),
            Self::Bezoutian(g, h) => write!(f, "bez({g}|{h})"),
            Self::Composed(outer, inner) => write!(f, "compose({outer}|{inner})"),
        }
    }
}
