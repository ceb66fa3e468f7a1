//! Eigenvalue jobs: spectra of `A` and of preconditioned operators.

use std::time::Instant;

use anyhow::{anyhow, Result};
use hfp_core::spectra::{dense_eigenvalues, materialize, spectrum_report, PreconditionedOperator, SpectrumReport};

use crate::config::{Cell, PreconditionerId};
use crate::report::fmt_float;
use crate::runner::{build_cell_system, build_preconditioner};

pub const SUMMARY_HEADER: &str = "experiment,problem,element,h,kappa,preconditioner,epsilon,n,n_negative_real,min_abs,max_abs,cluster_radius,median_abs";

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumResult {
    pub cell: Cell,
    pub report: SpectrumReport,
    pub wall_time_s: f64,
}

/// Spectrum of `A` for `preconditioner = none`, otherwise of `M^{-1} A`.
pub fn run_spectrum(cell: &Cell) -> Result<SpectrumResult> {
    let start = Instant::now();
    let system = build_cell_system(cell)?;
    let matrix = if cell.preconditioner == PreconditionerId::None {
        materialize(&system.matrix)
    } else {
        let mut notes = Vec::new();
        let built = build_preconditioner(cell, &system, &mut notes)?;
        materialize(&PreconditionedOperator { a: &system.matrix, m: built.as_dyn() })
    }
    .map_err(|e| anyhow!("{e}"))?;
    let eigenvalues = dense_eigenvalues(&matrix).map_err(|e| anyhow!("{e}"))?;
    Ok(SpectrumResult { cell: cell.clone(), report: spectrum_report(&eigenvalues), wall_time_s: start.elapsed().as_secs_f64() })
}

/// File stem identifying a spectrum job.
pub fn stem(cell: &Cell) -> String {
    let mut s = format!(
        "{}_{}_{}_h{}_k{}_{}",
        cell.experiment.to_lowercase(),
        cell.problem.id.name().to_lowercase(),
        cell.element.name().to_lowercase(),
        (1.0 / cell.h).round(),
        cell.problem.kappa,
        cell.preconditioner.name()
    );
    if let Some(e) = cell.epsilon {
        s.push_str(&format!("_eps{e:e}"));
    }
    s
}

pub fn summary_line(r: &SpectrumResult) -> String {
    let c = &r.cell;
    let m = &r.report;
    [
        c.experiment.clone(),
        c.problem.id.name().into(),
        c.element.name().into(),
        fmt_float(c.h),
        fmt_float(c.problem.kappa),
        c.preconditioner.name().into(),
        c.epsilon.map(fmt_float).unwrap_or_default(),
        m.eigenvalues.len().to_string(),
        m.n_negative_real.to_string(),
        fmt_float(m.min_abs),
        fmt_float(m.max_abs),
        fmt_float(m.cluster_radius),
        fmt_float(m.median_abs),
    ]
    .join(",")
}
