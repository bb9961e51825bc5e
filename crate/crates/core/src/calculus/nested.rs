use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{with_shrinking, CalculusOptions, Spectrum};
use crate::contour::{envelope_with, Contour, Disk, Node, QuadratureResult, SpectralEnclosure};
use crate::error::{Error, Result};
use crate::holofun::HoloFun2;
use crate::numcore::{resolvent, ComplexMatrix};

/// Smallest accepted kernel separation (see [`HoloFun2::separation`]).
const MIN_SEPARATION: f64 = 0.05;

/// Precomputed nested rule for `C ↦ Σⱼ aⱼ R_{A,λⱼ} C Gⱼ`, where
/// `Gⱼ = Σₖ f(λⱼ, μₖ) bₖ R_{B,μₖ}` already contains the inner integral.
#[derive(Debug, Clone)]
pub struct BoxtimesPlan {
    n: usize,
    m: usize,
    left: Vec<(Complex64, ComplexMatrix)>,
    right: Vec<ComplexMatrix>,
    nodes_used: usize,
    error_estimate: f64,
}

fn disks_of(contour: &Contour) -> Vec<Disk> {
    contour.components().iter().map(|c| Disk::new(c.center, c.radius)).collect()
}

/// Contours for `A` and `B` such that `f` is analytic on every product of the
/// closed disks they bound.
pub(crate) fn nested_contours(
    f: &HoloFun2,
    sa: &Spectrum,
    sb: &Spectrum,
    opts: &CalculusOptions,
) -> Result<(Contour, Contour)> {
    with_shrinking(|s| {
        let enc_a = sa.enclosure(opts.enclosure_mode, s);
        let enc_b = sb.enclosure(opts.enclosure_mode, s);
        let ga = envelope_with(&enc_a, &f.left_singular(&enc_b), 0.05 * s)?;
        let region_a = SpectralEnclosure::new(disks_of(&ga));
        let gb = envelope_with(&enc_b, &f.right_singular(&region_a), 0.05 * s)?;
        let sep = disks_of(&ga)
            .iter()
            .flat_map(|da| disks_of(&gb).into_iter().map(move |db| (*da, db)))
            .map(|(da, db)| f.separation(&da, &db))
            .fold(f64::INFINITY, f64::min);
        if sep < MIN_SEPARATION {
            return Err(Error::CannotSeparate(format!(
                "kernel {f} is not analytic on the enclosing bidisks (separation {sep:.3})"
            )));
        }
        Ok((ga, gb))
    })
}

fn resolvents(op: &ComplexMatrix, nodes: &[Node]) -> Result<Vec<ComplexMatrix>> {
    nodes.par_iter().map(|nd| resolvent(op, nd.z)).collect()
}

impl BoxtimesPlan {
    /// Refines both contours together until the result on `probe` settles.
    pub fn build(
        f: &HoloFun2,
        a: &ComplexMatrix,
        b: &ComplexMatrix,
        probe: &ComplexMatrix,
        opts: &CalculusOptions,
    ) -> Result<(Self, QuadratureResult)> {
        opts.validate()?;
        let sa = Spectrum::of(a, opts)?;
        let sb = Spectrum::of(b, opts)?;
        let (ga, gb) = nested_contours(f, &sa, &sb, opts)?;
        let (n, m) = (a.rows(), b.rows());
        let to_coeff = |w: Complex64| w / Complex64::new(0.0, 2.0 * PI);

        let mut count = opts.start_nodes;
        loop {
            let na = ga.with_nodes(count)?.nodes();
            let nb = gb.with_nodes(count)?.nodes();
            let ra = resolvents(a, &na)?;
            let rb = resolvents(b, &nb)?;
            let kernel: Vec<Vec<Complex64>> = na
                .par_iter()
                .map(|x| nb.iter().map(|y| f.eval2(x.z, y.z)).collect())
                .collect();
            if kernel.iter().flatten().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite);
            }

            let build_level = |stride: usize| -> Self {
                let keep = |k: usize| (k % count) % stride == 0;
                let left: Vec<(Complex64, ComplexMatrix)> = na
                    .iter()
                    .zip(&ra)
                    .enumerate()
                    .filter(|(k, _)| keep(*k))
                    .map(|(_, (nd, r))| (to_coeff(nd.w) * stride as f64, r.clone()))
                    .collect();
                let right: Vec<ComplexMatrix> = (0..na.len())
                    .into_par_iter()
                    .filter(|&j| keep(j))
                    .map(|j| {
                        let mut g = ComplexMatrix::zeros(m, m);
                        for (k, (nd, r)) in nb.iter().zip(&rb).enumerate() {
                            if keep(k) {
                                g.axpy(kernel[j][k] * to_coeff(nd.w) * stride as f64, r);
                            }
                        }
                        g
                    })
                    .collect();
                Self { n, m, left, right, nodes_used: count / stride, error_estimate: f64::NAN }
            };

            let mut full = build_level(1);
            let half = build_level(2);
            let value = full.apply(probe)?;
            let estimate = value.dist(&half.apply(probe)?);
            if !value.is_finite() {
                return Err(Error::NonFinite);
            }
            if estimate <= opts.tol * (1.0 + value.norm_fro()) {
                full.error_estimate = estimate;
                let result = QuadratureResult { value, error_estimate: estimate, nodes_used: count };
                return Ok((full, result));
            }
            if count * 2 > opts.node_cap {
                return Err(Error::QuadratureStall { nodes: count, error_estimate: estimate });
            }
            count *= 2;
        }
    }

    pub fn apply(&self, c: &ComplexMatrix) -> Result<ComplexMatrix> {
        if c.shape() != (self.n, self.m) {
            return Err(Error::ShapeMismatch(format!(
                "plan acts on {}x{}, got {:?}",
                self.n,
                self.m,
                c.shape()
            )));
        }
        let terms: Vec<ComplexMatrix> = self
            .left
            .par_iter()
            .zip(&self.right)
            .map(|((coeff, ra), g)| ra.matmul(c).matmul(g).scale(*coeff))
            .collect();
        let mut acc = ComplexMatrix::zeros(self.n, self.m);
        for t in &terms {
            acc += t;
        }
        Ok(acc)
    }

    pub fn nodes_used(&self) -> usize {
        self.nodes_used
    }

    pub fn error_estimate(&self) -> f64 {
        self.error_estimate
    }
}
