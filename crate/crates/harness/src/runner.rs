//! Running cells and collecting result rows.

use std::time::Instant;

use anyhow::{anyhow, Result};
use hfp_core::baselines::{ic0, MgHierarchy, MgOptions};
use hfp_core::bem::{BemOptions, BemPreconditioner, InnerSolverSettings};
use hfp_core::discretize::{build_system, Grid, LinearSystem};
use hfp_core::fmm::FmmConfig;
use hfp_core::krylov::{bicgstab, gmres, BicgstabOptions, GmresOptions, Identity, Preconditioner, SolveReport};
use hfp_core::special::Kernel;
use rayon::prelude::*;

use crate::config::{Cell, PreconditionerId, SolverId};

/// Outcome of one cell. A failed cell has `converged = false` and
/// `iterations = maxit`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub cell: Cell,
    pub iterations: usize,
    pub converged: bool,
    pub final_residual: f64,
    pub wall_time_s: f64,
    /// `key=value` metadata.
    pub notes: Vec<(String, String)>,
    pub residual_history: Vec<f64>,
}

impl ResultRow {
    pub fn note(&self, key: &str) -> Option<&str> {
        self.notes.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn build_cell_system(cell: &Cell) -> Result<LinearSystem> {
    let grid = Grid::for_problem(&cell.problem, cell.h).map_err(|e| anyhow!("{e}"))?;
    build_system(&cell.problem, grid, cell.element).map_err(|e| anyhow!("{e}"))
}

/// FMM settings of a cell for the system's wavenumber.
pub fn fmm_config(cell: &Cell) -> Result<FmmConfig> {
    let kernel = Kernel::for_wavenumber_2d(cell.problem.kappa).map_err(|e| anyhow!("{e}"))?;
    let base = FmmConfig::new(kernel).with_theta(cell.theta).with_backend(cell.backend);
    match cell.epsilon {
        Some(eps) => base.with_epsilon(eps).map_err(|e| anyhow!("{e}")),
        None => Ok(base.with_order(cell.p)),
    }
}

pub(crate) enum Built {
    Fmm(BemPreconditioner),
    Gmg(MgHierarchy),
    Ic(hfp_core::baselines::IcFactors),
    None(Identity),
}

impl Built {
    pub(crate) fn as_dyn(&self) -> &dyn Preconditioner {
        match self {
            Built::Fmm(p) => p,
            Built::Gmg(p) => p,
            Built::Ic(p) => p,
            Built::None(p) => p,
        }
    }
}

pub(crate) fn build_preconditioner(cell: &Cell, system: &LinearSystem, notes: &mut Vec<(String, String)>) -> Result<Built> {
    Ok(match cell.preconditioner {
        PreconditionerId::Fmm => {
            let config = fmm_config(cell)?;
            notes.push(("p".into(), config.order.to_string()));
            let options = BemOptions { inner: InnerSolverSettings::for_epsilon(cell.epsilon), ..Default::default() };
            Built::Fmm(BemPreconditioner::for_system(system, &config, options).map_err(|e| anyhow!("{e}"))?)
        }
        PreconditionerId::Gmg => {
            let options = MgOptions::default();
            notes.push(("smoother".into(), format!("jacobi(omega={:.4})", options.omega)));
            notes.push(("cycle".into(), format!("V({},{})", options.pre_smooth, options.post_smooth)));
            let mg = MgHierarchy::for_system(system, options).map_err(|e| anyhow!("{e}"))?;
            notes.push(("levels".into(), mg.num_levels().to_string()));
            Built::Gmg(mg)
        }
        PreconditionerId::Ic => {
            let f = ic0(&system.matrix).map_err(|e| anyhow!("{e}"))?;
            notes.push(("ic_shift".into(), format!("{:e}", f.shift)));
            Built::Ic(f)
        }
        PreconditionerId::None => Built::None(Identity(system.dim())),
    })
}

/// Runs one cell; errors become non-converged rows.
pub fn run_cell(cell: &Cell) -> ResultRow {
    let mut notes = Vec::new();
    let start = Instant::now();
    let outcome = solve_cell(cell, &mut notes);
    let wall_time_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(report) => {
            let converged = report.converged;
            if !converged {
                notes.push(("stopped_at".into(), report.iterations.to_string()));
            }
            ResultRow {
                cell: cell.clone(),
                iterations: if converged { report.iterations } else { cell.maxit },
                converged,
                final_residual: report.final_residual(),
                wall_time_s,
                notes,
                residual_history: report.residual_history,
            }
        }
        Err(e) => {
            log::warn!("{} {} h={} kappa={}: {e}", cell.experiment, cell.preconditioner, cell.h, cell.problem.kappa);
            notes.push(("error".into(), e.to_string().replace([',', '\n'], ";")));
            ResultRow {
                cell: cell.clone(),
                iterations: cell.maxit,
                converged: false,
                final_residual: 1.0,
                wall_time_s,
                notes,
                residual_history: vec![1.0],
            }
        }
    }
}

fn solve_cell(cell: &Cell, notes: &mut Vec<(String, String)>) -> Result<SolveReport> {
    let system = build_cell_system(cell)?;
    notes.push(("n".into(), system.dim().to_string()));
    let built = build_preconditioner(cell, &system, notes)?;
    let m = built.as_dyn();
    let report = match cell.solver {
        SolverId::Gmres => {
            notes.push(("counting".into(), "arnoldi_steps".into()));
            let opts = GmresOptions { tol: cell.tol, restart: cell.restart, max_iters: cell.maxit, x0: None };
            gmres(&system.matrix, &system.rhs, m, &opts)
        }
        SolverId::Bicgstab => {
            notes.push(("counting".into(), "bicgstab_steps".into()));
            let opts = BicgstabOptions { tol: cell.tol, max_iters: cell.maxit, x0: None };
            bicgstab(&system.matrix, &system.rhs, m, &opts)
        }
    };
    let report = match report {
        Ok(r) => r,
        Err(hfp_core::Error::Breakdown(what)) => {
            notes.push(("breakdown".into(), what.replace(',', ";")));
            return Err(anyhow!("solver breakdown: {what}"));
        }
        Err(e) => return Err(anyhow!("{e}")),
    };
    notes.push(("matvecs".into(), report.matvecs.to_string()));
    notes.push(("preconditioner_applies".into(), report.preconditioner_applies.to_string()));
    if let Built::Fmm(pc) = &built {
        let s = pc.stats();
        notes.push(("inner_iterations".into(), s.inner_iterations.to_string()));
        notes.push(("inner_failures".into(), s.inner_failures.to_string()));
    }
    Ok(report)
}

/// Runs cells in parallel and returns rows in input order.
pub fn run_cells(cells: &[Cell]) -> Vec<ResultRow> {
    cells
        .par_iter()
        .map(|c| {
            log::info!("{} {} {} h={} kappa={} eps={:?}", c.experiment, c.problem.id.name(), c.preconditioner, c.h, c.problem.kappa, c.epsilon);
            run_cell(c)
        })
        .collect()
}
