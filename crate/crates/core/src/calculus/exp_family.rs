use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use super::{with_shrinking, CalculusOptions};
use crate::contour::{default_margin, envelope, SpectralEnclosure};
use crate::error::{Error, Result};
use crate::numcore::{eigenvalues, resolvent, ComplexMatrix};

/// Exponentials `e^{sAt}` at many `t` from one set of cached resolvents.
pub(crate) struct ExpFamily {
    coeffs: Vec<Complex64>,
    nodes: Vec<Complex64>,
    resolvents: Vec<ComplexMatrix>,
    sign: f64,
}

impl ExpFamily {
    /// Doubles the node count until `e^{sAt}` has settled at every probe time.
    pub(crate) fn converge(a: &ComplexMatrix, sign: f64, probes: &[f64], opts: &CalculusOptions) -> Result<Self> {
        let eigs = eigenvalues(a)?;
        let contour = with_shrinking(|s| {
            envelope(&SpectralEnclosure::from_points(&eigs, opts.margin.unwrap_or_else(|| default_margin(&eigs)) * s), &SpectralEnclosure::empty())
        })?;
        let mut count = opts.start_nodes;
        loop {
            let nodes = contour.with_nodes(count)?.nodes();
            let resolvents: Vec<ComplexMatrix> = nodes.par_iter().map(|nd| resolvent(a, nd.z)).collect::<Result<_>>()?;
            let coeffs: Vec<Complex64> = nodes.iter().map(|nd| nd.w / Complex64::new(0.0, 2.0 * PI)).collect();
            let fam = Self { coeffs, nodes: nodes.iter().map(|nd| nd.z).collect(), resolvents, sign };
            let worst = probes
                .iter()
                .map(|&t| {
                    let full = fam.at(t, 1);
                    full.dist(&fam.at(t, 2)) / (1.0 + full.norm_fro())
                })
                .fold(0.0, f64::max);
            if worst <= opts.tol {
                return Ok(fam);
            }
            if count * 2 > opts.node_cap {
                return Err(Error::QuadratureStall { nodes: count, error_estimate: worst });
            }
            count *= 2;
        }
    }

    pub(crate) fn at(&self, t: f64, stride: usize) -> ComplexMatrix {
        let n = self.resolvents[0].rows();
        let mut acc = ComplexMatrix::zeros(n, n);
        for (k, ((c, z), r)) in self.coeffs.iter().zip(&self.nodes).zip(&self.resolvents).enumerate() {
            if k % stride == 0 {
                acc.axpy(c * (z * self.sign * t).exp() * stride as f64, r);
            }
        }
        acc
    }

    pub(crate) fn len(&self) -> usize {
        self.nodes.len()
    }
}
