//! Circle contours around spectral sets and trapezoidal quadrature of
//! matrix-valued contour integrals.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numcore::{eigenvalues, ComplexMatrix};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Disk {
    pub center: Complex64,
    pub radius: f64,
}

impl Disk {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius }
    }

    pub fn point(center: Complex64) -> Self {
        Self { center, radius: 0.0 }
    }

    /// Distance between the two disks, negative when they overlap.
    pub fn gap_to(&self, other: &Disk) -> f64 {
        (self.center - other.center).norm() - self.radius - other.radius
    }

    /// Distance to the ray `(−∞, 0]`, negative when the disk meets it.
    pub fn gap_to_negative_axis(&self) -> f64 {
        let c = self.center;
        let d = if c.re <= 0.0 { c.im.abs() } else { c.norm() };
        d - self.radius
    }

    pub fn contains(&self, z: Complex64) -> bool {
        (z - self.center).norm() <= self.radius
    }
}

/// A finite union of closed disks, optionally together with the closed
/// negative real axis (the cut of the principal `sqrt` and `log`).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectralEnclosure {
    disks: Vec<Disk>,
    negative_axis: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnclosureMode {
    #[default]
    Eigen,
    Gershgorin,
}

impl SpectralEnclosure {
    pub fn new(disks: Vec<Disk>) -> Self {
        Self { disks, negative_axis: false }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_points(points: &[Complex64], radius: f64) -> Self {
        Self::new(points.iter().map(|&z| Disk::new(z, radius)).collect())
    }

    pub fn with_negative_axis(mut self) -> Self {
        self.negative_axis = true;
        self
    }

    pub fn disks(&self) -> &[Disk] {
        &self.disks
    }

    pub fn includes_negative_axis(&self) -> bool {
        self.negative_axis
    }

    pub fn is_empty(&self) -> bool {
        self.disks.is_empty() && !self.negative_axis
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut disks = self.disks.clone();
        disks.extend_from_slice(&other.disks);
        Self { disks, negative_axis: self.negative_axis || other.negative_axis }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.disks.iter().any(|d| d.contains(z)) || (self.negative_axis && z.im == 0.0 && z.re <= 0.0)
    }

    /// Diameter of the union of disks (0 for a single point).
    pub fn diameter(&self) -> f64 {
        let mut diam: f64 = 0.0;
        for (i, a) in self.disks.iter().enumerate() {
            diam = diam.max(2.0 * a.radius);
            for b in &self.disks[i + 1..] {
                diam = diam.max((a.center - b.center).norm() + a.radius + b.radius);
            }
        }
        diam
    }

    /// Smallest distance from `disk` to this set.
    pub fn gap_to(&self, disk: &Disk) -> f64 {
        let mut gap = self.disks.iter().map(|d| d.gap_to(disk)).fold(f64::INFINITY, f64::min);
        if self.negative_axis {
            gap = gap.min(disk.gap_to_negative_axis());
        }
        gap
    }
}

/// `0.1·max(diam, 0.1·(1 + max|λ|))`.
pub fn default_margin(points: &[Complex64]) -> f64 {
    let mut diam: f64 = 0.0;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            diam = diam.max((a - b).norm());
        }
    }
    let size = points.iter().map(|z| z.norm()).fold(0.0, f64::max);
    0.1 * diam.max(0.1 * (1.0 + size))
}

/// Disks covering `σ(A)`: radius-`margin` disks around computed eigenvalues,
/// or Gershgorin row disks widened by `margin`.
pub fn enclosure(a: &ComplexMatrix, margin: f64, mode: EnclosureMode) -> Result<SpectralEnclosure> {
    let n = a.ensure_square("enclosure operand")?;
    if !(margin > 0.0) || !margin.is_finite() {
        return Err(Error::InvalidInput(format!("enclosure margin must be positive, got {margin}")));
    }
    match mode {
        EnclosureMode::Eigen => Ok(SpectralEnclosure::from_points(&eigenvalues(a)?, margin)),
        EnclosureMode::Gershgorin => Ok(SpectralEnclosure::new(
            (0..n)
                .map(|i| {
                    let off: f64 = (0..n).filter(|&j| j != i).map(|j| a[(i, j)].norm()).sum();
                    Disk::new(a[(i, i)], off + margin)
                })
                .collect(),
        )),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: Complex64,
    pub radius: f64,
    /// +1 counterclockwise, −1 clockwise.
    pub orientation: i8,
}

impl Circle {
    pub fn new(center: Complex64, radius: f64) -> Self {
        Self { center, radius, orientation: 1 }
    }

    fn covering(&self, other: &Circle) -> Circle {
        let d = (other.center - self.center).norm();
        if d + other.radius <= self.radius {
            return *self;
        }
        if d + self.radius <= other.radius {
            return *other;
        }
        let radius = 0.5 * (d + self.radius + other.radius);
        let dir = (other.center - self.center) / d;
        let center = self.center + dir * (radius - self.radius);
        Circle { center, radius, orientation: 1 }
    }

    fn as_disk(&self) -> Disk {
        Disk::new(self.center, self.radius)
    }
}

/// Quadrature node: point `z` and weight `w` with `∮ f ≈ Σ w f(z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Node {
    pub z: Complex64,
    pub w: Complex64,
}

/// A union of circles with equally spaced trapezoidal nodes on each.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    components: Vec<Circle>,
    nodes_per_component: usize,
}

impl Contour {
    pub fn new(components: Vec<Circle>, nodes_per_component: usize) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("contour needs at least one circle".into()));
        }
        if !nodes_per_component.is_power_of_two() || nodes_per_component < 2 {
            return Err(Error::InvalidInput(format!(
                "nodes per component must be a power of two, got {nodes_per_component}"
            )));
        }
        if let Some(c) = components.iter().find(|c| !(c.radius > 0.0) || c.orientation.abs() != 1) {
            return Err(Error::InvalidInput(format!("invalid circle {c:?}")));
        }
        Ok(Self { components, nodes_per_component })
    }

    pub fn circle(center: Complex64, radius: f64) -> Self {
        Self { components: vec![Circle::new(center, radius)], nodes_per_component: 64 }
    }

    pub fn components(&self) -> &[Circle] {
        &self.components
    }

    pub fn nodes_per_component(&self) -> usize {
        self.nodes_per_component
    }

    pub fn with_nodes(&self, nodes_per_component: usize) -> Result<Self> {
        Self::new(self.components.clone(), nodes_per_component)
    }

    pub fn reversed(&self) -> Self {
        let components = self
            .components
            .iter()
            .map(|c| Circle { orientation: -c.orientation, ..*c })
            .collect();
        Self { components, nodes_per_component: self.nodes_per_component }
    }

    /// Concatenation of two contours (same node count).
    pub fn join(&self, other: &Contour) -> Self {
        let mut components = self.components.clone();
        components.extend_from_slice(&other.components);
        Self { components, nodes_per_component: self.nodes_per_component.max(other.nodes_per_component) }
    }

    pub fn nodes(&self) -> Vec<Node> {
        nodes_for(&self.components, self.nodes_per_component)
    }

    pub fn winding_number(&self, z: Complex64) -> i32 {
        self.components
            .iter()
            .filter(|c| (z - c.center).norm() < c.radius)
            .map(|c| c.orientation as i32)
            .sum()
    }

    /// Smallest distance from a node-carrying circle to the given set.
    pub fn clearance(&self, set: &SpectralEnclosure) -> f64 {
        self.components
            .iter()
            .map(|c| {
                let mut g = set
                    .disks()
                    .iter()
                    .map(|d| {
                        let dist = (d.center - c.center).norm();
                        (dist - c.radius).abs() - d.radius
                    })
                    .fold(f64::INFINITY, f64::min);
                if set.includes_negative_axis() {
                    g = g.min(Disk::new(c.center, c.radius).gap_to_negative_axis());
                }
                g
            })
            .fold(f64::INFINITY, f64::min)
    }
}

fn nodes_for(components: &[Circle], n: usize) -> Vec<Node> {
    let mut nodes = Vec::with_capacity(components.len() * n);
    for c in components {
        for k in 0..n {
            let e = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64);
            nodes.push(Node {
                z: c.center + c.radius * e,
                w: c.orientation as f64 * c.radius * (2.0 * PI * I / n as f64) * e,
            });
        }
    }
    nodes
}

/// Circles winding once around `inside` and zero times around `avoid`,
/// with relative safety gap 0.05.
pub fn envelope(inside: &SpectralEnclosure, avoid: &SpectralEnclosure) -> Result<Contour> {
    envelope_with(inside, avoid, 0.05)
}

/// As [`envelope`], with the preferred node-to-enclosure gap given relative to
/// the diameter of `inside`.
pub fn envelope_with(inside: &SpectralEnclosure, avoid: &SpectralEnclosure, rel_gap: f64) -> Result<Contour> {
    if inside.disks().is_empty() {
        return Err(Error::InvalidInput("nothing to enclose".into()));
    }
    let diam = inside.diameter();
    let scale = if diam > 0.0 { diam } else { 1.0 };
    let gap = inside.disks().iter().map(|d| avoid.gap_to(d)).fold(f64::INFINITY, f64::min);
    if gap <= 0.0 {
        return Err(Error::CannotSeparate(format!(
            "enclosed set meets the avoided set (gap {gap:.3e})"
        )));
    }
    let delta = if gap.is_finite() {
        (rel_gap * scale).max(gap / 4.0).min(gap / 2.0)
    } else {
        rel_gap * scale
    };

    let mut circles: Vec<Circle> = inside
        .disks()
        .iter()
        .map(|d| Circle::new(d.center, d.radius + delta))
        .collect();
    // merge overlapping circles until pairwise disjoint
    loop {
        let mut merged = false;
        'outer: for i in 0..circles.len() {
            for j in (i + 1)..circles.len() {
                if circles[i].as_disk().gap_to(&circles[j].as_disk()) < 0.0 {
                    let cover = circles[i].covering(&circles[j]);
                    circles[i] = cover;
                    circles.swap_remove(j);
                    merged = true;
                    break 'outer;
                }
            }
        }
        if !merged {
            break;
        }
    }

    let contour = Contour::new(circles, 64)?;
    if !avoid.is_empty() {
        for d in avoid.disks() {
            if contour.winding_number(d.center) != 0 {
                return Err(Error::CannotSeparate("envelope swallows part of the avoided set".into()));
            }
        }
        let clearance = contour.clearance(avoid);
        if clearance < gap / 4.0 {
            return Err(Error::CannotSeparate(format!(
                "envelope passes within {clearance:.3e} of the avoided set (gap {gap:.3e})"
            )));
        }
    }
    Ok(contour)
}

/// Convergence controls for [`integrate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub tol: f64,
    pub start_nodes: usize,
    pub node_cap: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tol: 1e-10, start_nodes: 64, node_cap: 4096 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadratureResult {
    pub value: ComplexMatrix,
    /// `‖I_N − I_{N/2}‖_F` at the accepted node count.
    pub error_estimate: f64,
    /// Nodes per component at acceptance.
    pub nodes_used: usize,
}

fn eval_nodes<F>(nodes: &[Node], f: &F) -> Result<Vec<ComplexMatrix>>
where
    F: Fn(Complex64) -> Result<ComplexMatrix> + Sync,
{
    nodes.par_iter().map(|node| f(node.z)).collect()
}

/// Weighted sum over nodes `k` with `k % stride == 0`, scaled by `1/2πi`.
fn weighted_sum(nodes: &[Node], values: &[ComplexMatrix], stride: usize) -> ComplexMatrix {
    let mut acc = ComplexMatrix::zeros(values[0].rows(), values[0].cols());
    let factor = stride as f64 / (2.0 * PI) * -I;
    for (k, (node, v)) in nodes.iter().zip(values).enumerate() {
        if k % stride == 0 {
            acc.axpy(node.w * factor, v);
        }
    }
    acc
}

/// `(1/2πi) Σ w_k f(z_k)` at a fixed node count, no refinement.
pub fn integrate_fixed<F>(contour: &Contour, integrand: F) -> Result<ComplexMatrix>
where
    F: Fn(Complex64) -> Result<ComplexMatrix> + Sync,
{
    let nodes = contour.nodes();
    let values = eval_nodes(&nodes, &integrand)?;
    Ok(weighted_sum(&nodes, &values, 1))
}

/// Adaptive trapezoidal quadrature: node counts double (reusing earlier
/// evaluations) until `‖I_N − I_{N/2}‖ ≤ tol·(1 + ‖I_N‖)`.
pub fn integrate<F>(contour: &Contour, opts: &QuadratureOptions, integrand: F) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Result<ComplexMatrix> + Sync,
{
    let circles = contour.components();
    let mut n = opts.start_nodes.max(2);
    let mut values_per_circle: Vec<Vec<ComplexMatrix>> = Vec::new();
    loop {
        let nodes_per_circle: Vec<Vec<Node>> = circles.iter().map(|c| nodes_for(std::slice::from_ref(c), n)).collect();
        if values_per_circle.is_empty() {
            for nodes in &nodes_per_circle {
                values_per_circle.push(eval_nodes(nodes, &integrand)?);
            }
        } else {
            // only odd-indexed nodes are new
            for (vals, nodes) in values_per_circle.iter_mut().zip(&nodes_per_circle) {
                let odd: Vec<Node> = nodes.iter().skip(1).step_by(2).copied().collect();
                let new_vals = eval_nodes(&odd, &integrand)?;
                let mut merged = Vec::with_capacity(n);
                for (old, new) in vals.drain(..).zip(new_vals) {
                    merged.push(old);
                    merged.push(new);
                }
                *vals = merged;
            }
        }

        let mut full: Option<ComplexMatrix> = None;
        let mut half: Option<ComplexMatrix> = None;
        for (nodes, vals) in nodes_per_circle.iter().zip(&values_per_circle) {
            let f = weighted_sum(nodes, vals, 1);
            let h = weighted_sum(nodes, vals, 2);
            full = Some(match full {
                Some(acc) => acc + f,
                None => f,
            });
            half = Some(match half {
                Some(acc) => acc + h,
                None => h,
            });
        }
        let full = full.expect("contour has components");
        let estimate = full.dist(&half.expect("contour has components"));
        if !estimate.is_finite() || !full.is_finite() {
            return Err(Error::NonFinite);
        }
        if estimate <= opts.tol * (1.0 + full.norm_fro()) {
            return Ok(QuadratureResult { value: full, error_estimate: estimate, nodes_used: n });
        }
        if n * 2 > opts.node_cap {
            return Err(Error::QuadratureStall { nodes: n, error_estimate: estimate });
        }
        n *= 2;
    }
}
