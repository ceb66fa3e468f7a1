use num_complex::Complex64;

use super::{cell_self_integral, discretize_boundary, element_integral, gauss_legendre, BoundaryMesh, Layer};
use crate::error::Result;
use crate::geometry::Point2;
use crate::discretize::CsrMatrix;
use crate::linalg::{DenseMatrix, Lu};
use crate::special::{greens, Kernel};

use super::operators::ELEMENT_QUADRATURE_POINTS;

fn layer_matrix(mesh: &BoundaryMesh, targets: &[Point2], layer: Layer, kernel: Kernel) -> Result<DenseMatrix> {
    let rule = gauss_legendre(ELEMENT_QUADRATURE_POINTS)?;
    let mut m = DenseMatrix::zeros(targets.len(), mesh.len());
    for (i, &p) in targets.iter().enumerate() {
        for (j, e) in mesh.elements.iter().enumerate() {
            m[(i, j)] = element_integral(e, p, layer, kernel, &rule)?;
        }
    }
    Ok(m)
}

/// Single layer element integrals, `targets x elements`.
pub fn dense_single_layer(mesh: &BoundaryMesh, targets: &[Point2], kernel: Kernel) -> Result<DenseMatrix> {
    layer_matrix(mesh, targets, Layer::Single, kernel)
}

/// Double layer element integrals, `targets x elements`.
pub fn dense_double_layer(mesh: &BoundaryMesh, targets: &[Point2], kernel: Kernel) -> Result<DenseMatrix> {
    layer_matrix(mesh, targets, Layer::Double, kernel)
}

/// `w_j G(target_i, point_j)`, with the square cell integral on coincident
/// pairs when `self_cells` is set (zero otherwise).
pub fn dense_volume(points: &[Point2], weights: &[f64], targets: &[Point2], kernel: Kernel, self_cells: bool) -> Result<DenseMatrix> {
    let mut m = DenseMatrix::zeros(targets.len(), points.len());
    for (i, &t) in targets.iter().enumerate() {
        for (j, &p) in points.iter().enumerate() {
            m[(i, j)] = if p == t {
                if self_cells {
                    cell_self_integral(kernel, weights[j].sqrt())?
                } else {
                    Complex64::default()
                }
            } else {
                greens(kernel, p, t)? * weights[j]
            };
        }
    }
    Ok(m)
}

/// The boundary integral preconditioner assembled densely and solved by LU.
#[derive(Debug, Clone)]
pub struct DensePipeline {
    single_lu: Lu,
    volume_to_boundary: DenseMatrix,
    single_to_nodes: DenseMatrix,
    volume_to_nodes: DenseMatrix,
    sigma: f64,
    mass_lu: Option<Lu>,
    weight: f64,
}

impl DensePipeline {
    pub fn new(
        nodes: &[Point2],
        spacing: f64,
        domain: (f64, f64),
        n_per_side: usize,
        mass: Option<&CsrMatrix>,
        kernel: Kernel,
        self_cells: bool,
    ) -> Result<Self> {
        let mesh = discretize_boundary(domain.0, domain.1, n_per_side)?;
        let midpoints = mesh.midpoints();
        let weight = spacing * spacing;
        let weights = vec![weight; nodes.len()];
        Ok(Self {
            single_lu: dense_single_layer(&mesh, &midpoints, kernel)?.lu()?,
            volume_to_boundary: dense_volume(nodes, &weights, &midpoints, kernel, false)?,
            single_to_nodes: dense_single_layer(&mesh, nodes, kernel)?,
            volume_to_nodes: dense_volume(nodes, &weights, nodes, kernel, self_cells)?,
            sigma: 1.0 / weight,
            mass_lu: mass.map(|m| m.to_dense().lu()).transpose()?,
            weight,
        })
    }

    pub fn apply(&self, r: &[Complex64]) -> Vec<Complex64> {
        let density: Vec<Complex64> = match &self.mass_lu {
            Some(lu) => lu.solve(r).into_iter().map(|v| v * (self.weight * self.sigma)).collect(),
            None => r.iter().map(|v| v * self.sigma).collect(),
        };
        let v_boundary = self.volume_to_boundary.matvec(&density);
        let rhs: Vec<Complex64> = v_boundary.iter().map(|v| -v).collect();
        let q = self.single_lu.solve(&rhs);
        let mut z = self.single_to_nodes.matvec(&q);
        for (zi, v) in z.iter_mut().zip(self.volume_to_nodes.matvec(&density)) {
            *zi += v;
        }
        z
    }

    /// The preconditioner as an explicit matrix.
    pub fn matrix(&self) -> DenseMatrix {
        let n = self.volume_to_nodes.rows;
        let mut m = DenseMatrix::zeros(n, n);
        let mut e = vec![Complex64::default(); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.apply(&e).into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = Complex64::default();
        }
        m
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}
