//! Constant-element collocation BEM on the boundary of an axis-aligned square.
//!
//! Interior fields are represented as `u = G q - K u_b + V`, where `G` and
//! `K` are the single and double layer potentials, `q` is the outward normal
//! derivative of `u`, `u_b` its boundary trace and `V(x) = int rho G dx` the
//! volume potential of a density `rho` with `laplace(u) + kappa^2 u = -rho`.
//! Collocating at element midpoints gives `G q = (I/2 + K) u_b - V`.

mod dense;
mod operators;
mod preconditioner;
mod quadrature;

pub use dense::{dense_double_layer, dense_single_layer, dense_volume, DensePipeline};
pub use operators::{
    evaluate_interior, ELEMENT_QUADRATURE_POINTS, solve_boundary_flux, volume_to_boundary, BoundarySolver, FluxSolve, InnerSolverSettings,
    InteriorEvaluator,
};
pub use preconditioner::{BemOptions, BemPreconditioner, PreconditionerStats};
pub use quadrature::{cell_self_integral, gauss_legendre, QuadratureRule};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::special::{greens, greens_normal_deriv, self_single_layer_2d, Kernel};

/// Straight boundary element with a constant basis function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryElement {
    pub a: Point2,
    pub b: Point2,
    pub midpoint: Point2,
    pub width: f64,
    /// Outward unit normal.
    pub normal: Point2,
}

impl BoundaryElement {
    pub fn new(a: Point2, b: Point2, normal: Point2) -> Self {
        let width = (b - a).norm();
        Self { a, b, midpoint: (a + b) * 0.5, width, normal }
    }

    /// Point at local coordinate `xi` in `[-1, 1]`.
    pub fn point(&self, xi: f64) -> Point2 {
        self.midpoint + (self.b - self.a) * (0.5 * xi)
    }

    /// `|J|` of the map from `[-1, 1]`.
    pub fn jacobian(&self) -> f64 {
        0.5 * self.width
    }

    /// Whether `p` lies on the open element, within a relative tolerance.
    fn contains(&self, p: Point2) -> bool {
        let t = self.b - self.a;
        let d = p - self.a;
        let along = d.dot(t) / (self.width * self.width);
        let off = (d.x * t.y - d.y * t.x).abs() / self.width;
        off <= 1e-12 * self.width && along > 0.0 && along < 1.0
    }
}

/// Elements ordered counter-clockwise from the lower-left corner.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryMesh {
    pub elements: Vec<BoundaryElement>,
}

impl BoundaryMesh {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Collocation nodes.
    pub fn midpoints(&self) -> Vec<Point2> {
        self.elements.iter().map(|e| e.midpoint).collect()
    }

    pub fn normals(&self) -> Vec<Point2> {
        self.elements.iter().map(|e| e.normal).collect()
    }

    pub fn perimeter(&self) -> f64 {
        self.elements.iter().map(|e| e.width).sum()
    }
}

/// `4 n_per_side` equal elements on the boundary of `[lo, hi]^2`.
pub fn discretize_boundary(lo: f64, hi: f64, n_per_side: usize) -> Result<BoundaryMesh> {
    if n_per_side < 2 {
        return Err(Error::Domain(format!("need at least 2 elements per side, got {n_per_side}")));
    }
    if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("invalid domain [{lo}, {hi}]")));
    }
    let at = |k: usize| lo + (hi - lo) * k as f64 / n_per_side as f64;
    let n = n_per_side;
    let mut elements = Vec::with_capacity(4 * n);
    for k in 0..n {
        elements.push(BoundaryElement::new(Point2::new(at(k), lo), Point2::new(at(k + 1), lo), Point2::new(0.0, -1.0)));
    }
    for k in 0..n {
        elements.push(BoundaryElement::new(Point2::new(hi, at(k)), Point2::new(hi, at(k + 1)), Point2::new(1.0, 0.0)));
    }
    for k in 0..n {
        elements.push(BoundaryElement::new(
            Point2::new(at(n - k), hi),
            Point2::new(at(n - k - 1), hi),
            Point2::new(0.0, 1.0),
        ));
    }
    for k in 0..n {
        elements.push(BoundaryElement::new(
            Point2::new(lo, at(n - k)),
            Point2::new(lo, at(n - k - 1)),
            Point2::new(-1.0, 0.0),
        ));
    }
    Ok(BoundaryMesh { elements })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layer {
    /// `int G(x, P) dGamma_x`.
    Single,
    /// `int dG/dn_x(x, P) dGamma_x`.
    Double,
}

/// Integral of the layer kernel over one element, seen from `point`.
pub fn element_integral(
    element: &BoundaryElement,
    point: Point2,
    layer: Layer,
    kernel: Kernel,
    rule: &QuadratureRule,
) -> Result<Complex64> {
    if (point - element.midpoint).norm() <= 1e-12 * element.width {
        return match layer {
            Layer::Single => self_single_layer_2d(kernel, element.width),
            Layer::Double => Ok(Complex64::default()),
        };
    }
    if element.contains(point) {
        return Err(Error::Singular);
    }
    let mut sum = Complex64::default();
    for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
        let x = element.point(xi);
        let k = match layer {
            Layer::Single => greens(kernel, x, point)?,
            Layer::Double => greens_normal_deriv(kernel, x, point, element.normal)?,
        };
        sum += k * w;
    }
    Ok(sum * element.jacobian())
}

/// Volume quadrature: `V(x) = sum_j weight_j value_j G(x, point_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VolumeSources {
    pub points: Vec<Point2>,
    pub weights: Vec<f64>,
    /// Density `rho` at each point.
    pub values: Vec<Complex64>,
}

impl VolumeSources {
    pub fn new(points: Vec<Point2>, weights: Vec<f64>, values: Vec<Complex64>) -> Result<Self> {
        if weights.len() != points.len() {
            return Err(Error::Dimension { expected: points.len(), got: weights.len() });
        }
        if values.len() != points.len() {
            return Err(Error::Dimension { expected: points.len(), got: values.len() });
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0)) {
            return Err(Error::Domain(format!("volume weights must be positive, got {w}")));
        }
        Ok(Self { points, weights, values })
    }

    /// Equal weights on every point.
    pub fn uniform(points: Vec<Point2>, weight: f64, values: Vec<Complex64>) -> Result<Self> {
        let weights = vec![weight; points.len()];
        Self::new(points, weights, values)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `weight_j * value_j`.
    pub fn charges(&self) -> Vec<Complex64> {
        self.weights.iter().zip(&self.values).map(|(w, v)| v * *w).collect()
    }
}

#[cfg(test)]
mod tests;
