use std::sync::atomic::{AtomicU64, AtomicUsize, Ordering};

use num_complex::Complex64;

use super::operators::{BoundarySolver, InnerSolverSettings, InteriorEvaluator, VolumeOperator};
use super::discretize_boundary;
use crate::discretize::{assemble, CsrMatrix, LinearSystem};
use crate::error::{Error, Result};
use crate::fmm::FmmConfig;
use crate::geometry::Point2;
use crate::krylov::{conjugate_gradient, Preconditioner};
use crate::special::Kernel;

const MASS_TOL: f64 = 1e-13;
const MASS_MAX_ITERS: usize = 1000;

/// Counters accumulated over preconditioner applications.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PreconditionerStats {
    pub applies: usize,
    pub inner_iterations: usize,
    /// Inner solves that hit the iteration cap.
    pub inner_failures: usize,
    pub worst_inner_residual: f64,
}

/// Approximate inverse of a finite element Helmholtz matrix through a
/// boundary integral solve with zero Dirichlet data.
///
/// A residual `r` on the interior nodes becomes a density on the nodes with
/// quadrature weights `s^2` (`s` the node spacing). With a mass matrix the
/// density is `M^{-1} r`, otherwise `sigma r` with `sigma = 1 / s^2`. Its
/// volume potential feeds the flux solve, and `z = G q + V` is evaluated back
/// at the nodes.
#[derive(Debug)]
pub struct BemPreconditioner {
    nodes: Vec<Point2>,
    weight: f64,
    sigma: f64,
    mass: Option<CsrMatrix>,
    boundary: BoundarySolver,
    volume_to_boundary: VolumeOperator,
    volume_to_nodes: VolumeOperator,
    interior: InteriorEvaluator,
    applies: AtomicUsize,
    inner_iterations: AtomicUsize,
    inner_failures: AtomicUsize,
    worst_residual: AtomicU64,
}

/// Construction parameters beyond the geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BemOptions {
    pub inner: InnerSolverSettings,
    /// Add each node's own cell integral to the volume potential at that node.
    pub self_cells: bool,
    /// Turn residuals into densities with the consistent mass matrix
    /// (`for_system` only).
    pub mass_scaling: bool,
}

impl Default for BemOptions {
    fn default() -> Self {
        Self { inner: InnerSolverSettings::default(), self_cells: true, mass_scaling: true }
    }
}

impl BemPreconditioner {
    /// `nodes` on a uniform lattice of spacing `spacing` inside `[lo, hi]^2`,
    /// boundary split into `n_per_side` elements per edge. `mass`, when
    /// given, is the mass matrix on the nodes.
    pub fn new(
        nodes: &[Point2],
        spacing: f64,
        domain: (f64, f64),
        n_per_side: usize,
        mass: Option<CsrMatrix>,
        config: &FmmConfig,
        options: BemOptions,
    ) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::Domain(format!("node spacing must be positive, got {spacing}")));
        }
        let (lo, hi) = domain;
        if let Some(p) = nodes.iter().find(|p| !(p.x > lo && p.x < hi && p.y > lo && p.y < hi)) {
            return Err(Error::Domain(format!("node {p:?} is not inside [{lo}, {hi}]^2")));
        }
        if let Some(m) = &mass {
            if m.nrows != nodes.len() || m.ncols != nodes.len() {
                return Err(Error::Dimension { expected: nodes.len(), got: m.nrows });
            }
        }
        let mesh = discretize_boundary(lo, hi, n_per_side)?;
        let weight = spacing * spacing;
        let weights = vec![weight; nodes.len()];
        let midpoints = mesh.midpoints();
        let volume_to_boundary = VolumeOperator::new(nodes, &weights, &midpoints, config, false)?;
        let volume_to_nodes = VolumeOperator::new(nodes, &weights, nodes, config, options.self_cells)?;
        let interior = InteriorEvaluator::new(&mesh, nodes, config)?;
        let boundary = BoundarySolver::new(mesh, config, options.inner)?;
        Ok(Self {
            nodes: nodes.to_vec(),
            weight,
            sigma: 1.0 / weight,
            mass,
            boundary,
            volume_to_boundary,
            volume_to_nodes,
            interior,
            applies: AtomicUsize::new(0),
            inner_iterations: AtomicUsize::new(0),
            inner_failures: AtomicUsize::new(0),
            worst_residual: AtomicU64::new(0f64.to_bits()),
        })
    }

    /// Preconditioner for a finite element system, with the kernel set to the
    /// system's wavenumber and one boundary element per cell edge.
    pub fn for_system(system: &LinearSystem, config: &FmmConfig, options: BemOptions) -> Result<Self> {
        let config = FmmConfig { kernel: Kernel::for_wavenumber_2d(system.problem.kappa)?, ..*config };
        let grid = system.layout.grid;
        let mass = options.mass_scaling.then(|| assemble(grid, system.layout.element).mass);
        Self::new(&system.nodes, system.layout.spacing(), (grid.lo, grid.hi), grid.n, mass, &config, options)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_boundary_elements(&self) -> usize {
        self.boundary.len()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn uses_mass_scaling(&self) -> bool {
        self.mass.is_some()
    }

    pub fn stats(&self) -> PreconditionerStats {
        PreconditionerStats {
            applies: self.applies.load(Ordering::Relaxed),
            inner_iterations: self.inner_iterations.load(Ordering::Relaxed),
            inner_failures: self.inner_failures.load(Ordering::Relaxed),
            worst_inner_residual: f64::from_bits(self.worst_residual.load(Ordering::Relaxed)),
        }
    }

    pub fn reset_stats(&self) {
        self.applies.store(0, Ordering::Relaxed);
        self.inner_iterations.store(0, Ordering::Relaxed);
        self.inner_failures.store(0, Ordering::Relaxed);
        self.worst_residual.store(0f64.to_bits(), Ordering::Relaxed);
    }

    /// `z = M^{-1} r`. Inner solves that stop at the iteration cap are
    /// counted and their last iterate is used.
    pub fn try_apply(&self, r: &[Complex64]) -> Result<Vec<Complex64>> {
        if r.len() != self.nodes.len() {
            return Err(Error::Dimension { expected: self.nodes.len(), got: r.len() });
        }
        self.applies.fetch_add(1, Ordering::Relaxed);
        let charges: Vec<Complex64> = match &self.mass {
            Some(m) => {
                let density = conjugate_gradient(m, r, MASS_TOL, MASS_MAX_ITERS)?;
                if !density.converged {
                    return Err(Error::NoConvergence(density.iterations));
                }
                density.solution.into_iter().map(|v| v * self.weight).collect()
            }
            None => r.iter().map(|v| v * (self.sigma * self.weight)).collect(),
        };
        let v_boundary = self.volume_to_boundary.apply(&charges)?;
        let solve = self.boundary.solve_flux(None, &v_boundary)?;
        self.inner_iterations.fetch_add(solve.iterations, Ordering::Relaxed);
        self.worst_residual.fetch_max(solve.residual.to_bits(), Ordering::Relaxed);
        if !solve.converged {
            self.inner_failures.fetch_add(1, Ordering::Relaxed);
            log::warn!(
                "boundary flux solve stopped after {} iterations at residual {:.3e}",
                solve.iterations,
                solve.residual
            );
        }
        let mut z = self.interior.single_layer(&solve.flux)?;
        for (zi, v) in z.iter_mut().zip(self.volume_to_nodes.apply(&charges)?) {
            *zi += v;
        }
        Ok(z)
    }
}

impl Preconditioner for BemPreconditioner {
    fn dim(&self) -> usize {
        self.nodes.len()
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        z.copy_from_slice(&self.try_apply(r).expect("dimensions fixed at construction"));
    }
}
