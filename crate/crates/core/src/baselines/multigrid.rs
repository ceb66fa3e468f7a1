use num_complex::Complex64;

use crate::discretize::{assemble, CsrMatrix, ElementType, Grid, LinearSystem, NodeLayout};
use crate::error::{Error, Result};
use crate::krylov::Preconditioner;
use crate::linalg::Lu;

/// Largest system handed to the dense coarse solver.
pub const COARSEST_MAX_UNKNOWNS: usize = 81;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MgOptions {
    pub pre_smooth: usize,
    pub post_smooth: usize,
    /// Damped Jacobi weight.
    pub omega: f64,
    /// Coarsening stops once a level has at most this many unknowns.
    pub coarsest_unknowns: usize,
}

impl Default for MgOptions {
    fn default() -> Self {
        Self { pre_smooth: 2, post_smooth: 2, omega: 2.0 / 3.0, coarsest_unknowns: 1 }
    }
}

/// One grid of the hierarchy, finest first.
#[derive(Debug, Clone)]
pub struct MgLevel {
    pub grid: Grid,
    pub matrix: CsrMatrix,
    inv_diagonal: Vec<Complex64>,
    /// Bilinear interpolation from the next coarser level.
    prolongation: Option<CsrMatrix>,
    restriction: Option<CsrMatrix>,
}

/// Geometric multigrid for Q1 Helmholtz matrices `K - kappa^2 M`, with
/// every level re-discretized.
#[derive(Debug, Clone)]
pub struct MgHierarchy {
    pub levels: Vec<MgLevel>,
    pub options: MgOptions,
    coarse_lu: Lu,
}

impl MgHierarchy {
    pub fn new(grid: Grid, kappa: f64, options: MgOptions) -> Result<Self> {
        if options.coarsest_unknowns == 0 || options.coarsest_unknowns > COARSEST_MAX_UNKNOWNS {
            return Err(Error::Domain(format!(
                "coarsest level size must be in 1..={COARSEST_MAX_UNKNOWNS}, got {}",
                options.coarsest_unknowns
            )));
        }
        let mut grids = vec![grid];
        while interior(grids.last().expect("non-empty")) > options.coarsest_unknowns {
            let g = grids.last().expect("non-empty");
            let coarse = g.coarsen().ok_or_else(|| {
                Error::Domain(format!("grid with {} cells cannot be coarsened to {} unknowns", g.n, options.coarsest_unknowns))
            })?;
            grids.push(coarse);
        }
        let mut levels = Vec::with_capacity(grids.len());
        for (l, &g) in grids.iter().enumerate() {
            let fem = assemble(g, ElementType::Q1);
            let matrix = fem.stiffness.linear_combination(Complex64::new(1.0, 0.0), &fem.mass, Complex64::new(-kappa * kappa, 0.0));
            let inv_diagonal = matrix
                .diagonal()
                .into_iter()
                .map(|d| if d == Complex64::default() { Complex64::default() } else { 1.0 / d })
                .collect();
            let (prolongation, restriction) = match grids.get(l + 1) {
                Some(&coarse) => {
                    let p = bilinear_prolongation(g, coarse);
                    let r = p.transpose();
                    (Some(p), Some(r))
                }
                None => (None, None),
            };
            levels.push(MgLevel { grid: g, matrix, inv_diagonal, prolongation, restriction });
        }
        let coarse_lu = levels.last().expect("at least one level").matrix.to_dense().lu()?;
        Ok(Self { levels, options, coarse_lu })
    }

    /// Hierarchy for a Q1 system on its own grid and wavenumber.
    pub fn for_system(system: &LinearSystem, options: MgOptions) -> Result<Self> {
        if system.layout.element != ElementType::Q1 {
            return Err(Error::Domain("geometric multigrid supports Q1 systems only".into()));
        }
        Self::new(system.layout.grid, system.problem.kappa, options)
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// One V-cycle from a zero initial guess.
    pub fn vcycle(&self, r: &[Complex64]) -> Vec<Complex64> {
        self.cycle(0, r)
    }

    fn cycle(&self, l: usize, b: &[Complex64]) -> Vec<Complex64> {
        let level = &self.levels[l];
        let (Some(p), Some(r)) = (&level.prolongation, &level.restriction) else {
            return self.coarse_lu.solve(b);
        };
        let mut x = vec![Complex64::default(); b.len()];
        self.smooth(level, b, &mut x, self.options.pre_smooth);
        let res = residual(&level.matrix, b, &x);
        let correction = p.matvec(&self.cycle(l + 1, &r.matvec(&res)));
        for (xi, ci) in x.iter_mut().zip(correction) {
            *xi += ci;
        }
        self.smooth(level, b, &mut x, self.options.post_smooth);
        x
    }

    fn smooth(&self, level: &MgLevel, b: &[Complex64], x: &mut [Complex64], sweeps: usize) {
        for _ in 0..sweeps {
            let res = residual(&level.matrix, b, x);
            for ((xi, ri), di) in x.iter_mut().zip(res).zip(&level.inv_diagonal) {
                *xi += ri * di * self.options.omega;
            }
        }
    }
}

fn interior(g: &Grid) -> usize {
    (g.n - 1) * (g.n - 1)
}

fn residual(a: &CsrMatrix, b: &[Complex64], x: &[Complex64]) -> Vec<Complex64> {
    a.matvec(x).into_iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Interior-to-interior bilinear interpolation from `coarse` to `fine`, with
/// zero boundary values.
fn bilinear_prolongation(fine: Grid, coarse: Grid) -> CsrMatrix {
    let (fl, cl) = (NodeLayout::new(fine, ElementType::Q1), NodeLayout::new(coarse, ElementType::Q1));
    let mut t = Vec::with_capacity(4 * fl.num_interior());
    for (row, &k) in fl.interior_nodes.iter().enumerate() {
        let (fx, fy) = (k % fl.per_side, k / fl.per_side);
        let xs: &[(usize, f64)] = &if fx % 2 == 0 { vec![(fx / 2, 1.0)] } else { vec![(fx / 2, 0.5), (fx / 2 + 1, 0.5)] };
        let ys: &[(usize, f64)] = &if fy % 2 == 0 { vec![(fy / 2, 1.0)] } else { vec![(fy / 2, 0.5), (fy / 2 + 1, 0.5)] };
        for &(cy, wy) in ys {
            for &(cx, wx) in xs {
                if let Some(col) = cl.interior_index[cy * cl.per_side + cx] {
                    t.push((row, col, Complex64::new(wx * wy, 0.0)));
                }
            }
        }
    }
    CsrMatrix::from_triplets(fl.num_interior(), cl.num_interior(), t)
}

impl Preconditioner for MgHierarchy {
    fn dim(&self) -> usize {
        self.levels[0].matrix.nrows
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        z.copy_from_slice(&self.vcycle(r));
    }
}
