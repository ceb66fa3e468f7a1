//! Q1/Q2 finite elements for `-(laplace(u) + kappa^2 u) = -f` on uniform
//! square grids with Dirichlet elimination.
//!
//! The assembled system is `A = K - kappa^2 M` over interior nodes and
//! `b = -(M f) - A_ib g`, with `f` interpolated at every node and the boundary
//! values `g` lifted out of the eliminated columns.

mod csr;
mod problems;

pub use csr::CsrMatrix;
pub use problems::{builtin_problems, ProblemId, ProblemSpec};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::linalg::BandedLu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub enum ElementType {
    #[default]
    Q1,
    Q2,
}

impl ElementType {
    /// Lattice nodes per element edge minus one.
    pub fn degree(self) -> usize {
        match self {
            ElementType::Q1 => 1,
            ElementType::Q2 => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ElementType::Q1 => "Q1",
            ElementType::Q2 => "Q2",
        }
    }
}

impl std::str::FromStr for ElementType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "Q1" => Ok(ElementType::Q1),
            "Q2" => Ok(ElementType::Q2),
            other => Err(Error::Domain(format!("unknown element type {other}"))),
        }
    }
}

/// `n x n` square cells covering `[lo, hi]^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::Domain(format!("grid needs at least 2 cells per side, got {n}")));
        }
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("invalid domain [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi, n })
    }

    /// Grid with `round(1 / h)` cells per side, independent of the domain
    /// length.
    pub fn from_label(lo: f64, hi: f64, h: f64) -> Result<Self> {
        if !(h > 0.0 && h <= 0.5) {
            return Err(Error::Domain(format!("mesh label h must lie in (0, 0.5], got {h}")));
        }
        Self::new(lo, hi, (1.0 / h).round() as usize)
    }

    pub fn for_problem(problem: &ProblemSpec, h: f64) -> Result<Self> {
        Self::from_label(problem.lo, problem.hi, h)
    }

    /// Physical cell width.
    pub fn h(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    /// Half the cell count; `None` when `n` is odd.
    pub fn coarsen(&self) -> Option<Grid> {
        (self.n % 2 == 0 && self.n >= 4).then(|| Grid { n: self.n / 2, ..*self })
    }
}

/// Global node numbering for one element type on one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeLayout {
    pub grid: Grid,
    pub element: ElementType,
    /// Lattice nodes per side, `degree * n + 1`.
    pub per_side: usize,
    /// Lattice index to interior unknown.
    pub interior_index: Vec<Option<usize>>,
    /// Interior unknown to lattice index.
    pub interior_nodes: Vec<usize>,
}

impl NodeLayout {
    pub fn new(grid: Grid, element: ElementType) -> Self {
        let per_side = element.degree() * grid.n + 1;
        let mut interior_index = vec![None; per_side * per_side];
        let mut interior_nodes = Vec::new();
        for j in 1..per_side - 1 {
            for i in 1..per_side - 1 {
                let k = j * per_side + i;
                interior_index[k] = Some(interior_nodes.len());
                interior_nodes.push(k);
            }
        }
        Self { grid, element, per_side, interior_index, interior_nodes }
    }

    /// Distance between neighbouring lattice nodes.
    pub fn spacing(&self) -> f64 {
        self.grid.h() / self.element.degree() as f64
    }

    pub fn node(&self, k: usize) -> Point2 {
        let (i, j) = (k % self.per_side, k / self.per_side);
        let s = self.spacing();
        Point2::new(self.grid.lo + i as f64 * s, self.grid.lo + j as f64 * s)
    }

    pub fn num_interior(&self) -> usize {
        self.interior_nodes.len()
    }

    /// Interior nodes per side.
    pub fn interior_per_side(&self) -> usize {
        self.per_side - 2
    }

    pub fn interior_points(&self) -> Vec<Point2> {
        self.interior_nodes.iter().map(|&k| self.node(k)).collect()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        self.interior_index[k].is_none()
    }
}

/// 1D element matrices on a cell of width `h`: `(stiffness, mass)`.
fn line_matrices(element: ElementType, h: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    match element {
        ElementType::Q1 => (
            vec![vec![1.0 / h, -1.0 / h], vec![-1.0 / h, 1.0 / h]],
            vec![vec![h / 3.0, h / 6.0], vec![h / 6.0, h / 3.0]],
        ),
        ElementType::Q2 => {
            // 3-point Gauss on [0, 1]; exact for the quartic integrands here.
            let r = (0.6f64).sqrt();
            let pts = [0.5 * (1.0 - r), 0.5, 0.5 * (1.0 + r)];
            let wts = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];
            let phi = |t: f64| [2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)];
            let dphi = |t: f64| [4.0 * t - 3.0, -8.0 * t + 4.0, 4.0 * t - 1.0];
            let mut k = vec![vec![0.0; 3]; 3];
            let mut m = vec![vec![0.0; 3]; 3];
            for (&t, &w) in pts.iter().zip(&wts) {
                let (p, d) = (phi(t), dphi(t));
                for a in 0..3 {
                    for b in 0..3 {
                        k[a][b] += w * d[a] * d[b] / h;
                        m[a][b] += w * p[a] * p[b] * h;
                    }
                }
            }
            (k, m)
        }
    }
}

/// Element stiffness and mass in tensor-product local order
/// (`a + (deg + 1) b` for local lattice offsets `(a, b)`).
pub fn element_matrices(element: ElementType, h: f64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let (k1, m1) = line_matrices(element, h);
    let q = element.degree() + 1;
    let mut k = vec![vec![0.0; q * q]; q * q];
    let mut m = vec![vec![0.0; q * q]; q * q];
    for b in 0..q {
        for a in 0..q {
            for d in 0..q {
                for c in 0..q {
                    let (r, s) = (a + q * b, c + q * d);
                    k[r][s] = k1[a][c] * m1[b][d] + m1[a][c] * k1[b][d];
                    m[r][s] = m1[a][c] * m1[b][d];
                }
            }
        }
    }
    (k, m)
}

/// Stiffness and mass split into interior/interior and interior/boundary blocks.
#[derive(Debug, Clone)]
pub struct FemAssembly {
    pub layout: NodeLayout,
    pub stiffness: CsrMatrix,
    pub mass: CsrMatrix,
    /// Rows: interior unknowns; columns: all lattice nodes (interior entries zero).
    pub stiffness_boundary: CsrMatrix,
    pub mass_boundary: CsrMatrix,
    /// Mass coupling from every lattice node into interior rows.
    pub mass_full: CsrMatrix,
}

pub fn assemble(grid: Grid, element: ElementType) -> FemAssembly {
    let layout = NodeLayout::new(grid, element);
    let (ke, me) = element_matrices(element, grid.h());
    let deg = element.degree();
    let q = deg + 1;
    let ps = layout.per_side;
    let n_int = layout.num_interior();
    let n_all = ps * ps;
    let (mut k_ii, mut m_ii, mut k_ib, mut m_ib, mut m_full) = (vec![], vec![], vec![], vec![], vec![]);
    let mut local = Vec::with_capacity(q * q);
    for ey in 0..grid.n {
        for ex in 0..grid.n {
            local.clear();
            for b in 0..q {
                for a in 0..q {
                    local.push((ey * deg + b) * ps + ex * deg + a);
                }
            }
            for (r, &gr) in local.iter().enumerate() {
                let Some(i) = layout.interior_index[gr] else { continue };
                for (s, &gs) in local.iter().enumerate() {
                    let (kv, mv) = (Complex64::new(ke[r][s], 0.0), Complex64::new(me[r][s], 0.0));
                    m_full.push((i, gs, mv));
                    match layout.interior_index[gs] {
                        Some(j) => {
                            k_ii.push((i, j, kv));
                            m_ii.push((i, j, mv));
                        }
                        None => {
                            k_ib.push((i, gs, kv));
                            m_ib.push((i, gs, mv));
                        }
                    }
                }
            }
        }
    }
    FemAssembly {
        stiffness: CsrMatrix::from_triplets(n_int, n_int, k_ii),
        mass: CsrMatrix::from_triplets(n_int, n_int, m_ii),
        stiffness_boundary: CsrMatrix::from_triplets(n_int, n_all, k_ib),
        mass_boundary: CsrMatrix::from_triplets(n_int, n_all, m_ib),
        mass_full: CsrMatrix::from_triplets(n_int, n_all, m_full),
        layout,
    }
}

pub fn assemble_q1(grid: Grid) -> FemAssembly {
    assemble(grid, ElementType::Q1)
}

pub fn assemble_q2(grid: Grid) -> FemAssembly {
    assemble(grid, ElementType::Q2)
}

/// `A x = b` over the interior nodes of a problem.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub problem: ProblemSpec,
    pub layout: NodeLayout,
    pub matrix: CsrMatrix,
    pub rhs: Vec<Complex64>,
    /// Interior node coordinates, aligned with the unknowns.
    pub nodes: Vec<Point2>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    /// Exact solution sampled at the unknowns, if the problem has one.
    pub fn exact(&self) -> Option<Vec<Complex64>> {
        self.problem.has_exact().then(|| {
            self.nodes
                .iter()
                .map(|p| Complex64::new(self.problem.exact(p.x, p.y).expect("has exact"), 0.0))
                .collect()
        })
    }
}

impl LinearSystem {
    /// Banded LU solve of the assembled system.
    pub fn solve_direct(&self) -> Result<Vec<Complex64>> {
        let a = &self.matrix;
        let entries = (0..a.nrows).flat_map(|i| a.row(i).map(move |(j, v)| (i, j, v)));
        Ok(BandedLu::factor(a.nrows, a.bandwidth(), entries)?.solve(&self.rhs))
    }

    /// Values on every lattice node: `solution` inside, Dirichlet data on the boundary.
    pub fn full_field(&self, solution: &[Complex64]) -> Vec<Complex64> {
        let l = &self.layout;
        (0..l.per_side * l.per_side)
            .map(|k| match l.interior_index[k] {
                Some(i) => solution[i],
                None => {
                    let p = l.node(k);
                    Complex64::new(self.problem.dirichlet(p.x, p.y), 0.0)
                }
            })
            .collect()
    }

    /// `L2` norm of `u_h - u` over the domain, with `u_h` the finite element
    /// interpolant of `solution`.
    pub fn l2_error(&self, solution: &[Complex64]) -> Option<f64> {
        if !self.problem.has_exact() {
            return None;
        }
        let l = &self.layout;
        let field = self.full_field(solution);
        let deg = l.element.degree();
        let h = l.grid.h();
        let gauss = [
            (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
            (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
            (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
        ];
        let shape = |t: f64| -> Vec<f64> {
            match l.element {
                ElementType::Q1 => vec![1.0 - t, t],
                ElementType::Q2 => vec![2.0 * (t - 0.5) * (t - 1.0), -4.0 * t * (t - 1.0), 2.0 * t * (t - 0.5)],
            }
        };
        let mut sum = 0.0;
        for ey in 0..l.grid.n {
            for ex in 0..l.grid.n {
                for &(gy, wy) in &gauss {
                    let ty = 0.5 * (gy + 1.0);
                    let sy = shape(ty);
                    for &(gx, wx) in &gauss {
                        let tx = 0.5 * (gx + 1.0);
                        let sx = shape(tx);
                        let mut uh = Complex64::default();
                        for (b, &vb) in sy.iter().enumerate() {
                            for (a, &va) in sx.iter().enumerate() {
                                uh += field[(ey * deg + b) * l.per_side + ex * deg + a] * (va * vb);
                            }
                        }
                        let x = l.grid.lo + (ex as f64 + tx) * h;
                        let y = l.grid.lo + (ey as f64 + ty) * h;
                        let u = self.problem.exact(x, y).expect("has exact");
                        sum += wx * wy * 0.25 * h * h * (uh - u).norm_sqr();
                    }
                }
            }
        }
        Some(sum.sqrt())
    }
}

/// `A = K - kappa^2 M` and `b = -M f - (K_b - kappa^2 M_b) g`.
pub fn build_system(problem: &ProblemSpec, grid: Grid, element: ElementType) -> Result<LinearSystem> {
    if grid.lo != problem.lo || grid.hi != problem.hi {
        return Err(Error::Domain(format!(
            "grid [{}, {}] does not match the problem domain [{}, {}]",
            grid.lo, grid.hi, problem.lo, problem.hi
        )));
    }
    let fem = assemble(grid, element);
    let k2 = Complex64::new(problem.kappa * problem.kappa, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let matrix = fem.stiffness.linear_combination(one, &fem.mass, -k2);
    let layout = fem.layout;
    let all = layout.per_side * layout.per_side;
    let f: Vec<Complex64> = (0..all)
        .map(|k| {
            let p = layout.node(k);
            Complex64::new(problem.source(p.x, p.y), 0.0)
        })
        .collect();
    let g: Vec<Complex64> = (0..all)
        .map(|k| {
            if layout.is_boundary(k) {
                let p = layout.node(k);
                Complex64::new(problem.dirichlet(p.x, p.y), 0.0)
            } else {
                Complex64::default()
            }
        })
        .collect();
    let mf = fem.mass_full.matvec(&f);
    let kg = fem.stiffness_boundary.matvec(&g);
    let mg = fem.mass_boundary.matvec(&g);
    let rhs = mf.iter().zip(kg.iter().zip(&mg)).map(|(m, (k, mb))| -m - (k - k2 * mb)).collect();
    let nodes = layout.interior_points();
    Ok(LinearSystem { problem: *problem, layout, matrix, rhs, nodes })
}

#[cfg(test)]
mod tests;
