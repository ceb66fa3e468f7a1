//! The built-in experiments E1–E8.

use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use hfp_core::discretize::{ElementType, ProblemId};
use rayon::prelude::*;

use crate::config::{Cell, ExperimentConfig, PreconditionerId, SolverId};
use crate::report::{self, convergence_svg, eigenvalue_csv, scatter_svg, sort_rows, summary_markdown};
use crate::runner::{run_cells, ResultRow};
use crate::spectrum::{run_spectrum, stem, summary_line, SpectrumResult, SUMMARY_HEADER};

pub const EXPERIMENT_IDS: [&str; 8] = ["E1", "E2", "E3", "E4", "E5", "E6", "E7", "E8"];

const H5: f64 = 1.0 / 32.0;
const H6: f64 = 1.0 / 64.0;
const H7: f64 = 1.0 / 128.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub id: String,
    pub title: String,
    pub sweeps: Vec<ExperimentConfig>,
    /// Spectrum jobs; `preconditioner = none` means the matrix itself.
    pub spectra: Vec<Cell>,
}

/// Preconditioners compared in the iteration tables.
const TABLE_COLUMNS: [PreconditionerId; 3] = [PreconditionerId::Gmg, PreconditionerId::Fmm, PreconditionerId::Ic];

pub fn experiment(id: &str, seed: u64) -> Result<Experiment> {
    use PreconditionerId::*;
    let id = id.to_ascii_uppercase();
    let sweep = |problem, h: &[f64], k: &[f64]| {
        let mut c = ExperimentConfig::new(&id, problem, h.to_vec(), k.to_vec());
        c.seed = seed;
        c
    };
    let (title, sweeps, spectra) = match id.as_str() {
        "E1" => {
            let q1 = sweep(ProblemId::P1, &[H5, H6, H7], &[15.0]);
            let q2 = ExperimentConfig { element: ElementType::Q2, ..q1.clone() };
            ("Q1 versus Q2 elements, P1, kappa = 15", vec![q1, q2], vec![])
        }
        "E2" => {
            let mut c = sweep(ProblemId::P1, &[1.0 / 16.0, H5, H6, H7], &[5.0, 10.0, 20.0, 40.0]).with_preconditioners(&TABLE_COLUMNS);
            c.paired = true;
            ("P1 with kappa h = 0.3125", vec![c], vec![])
        }
        "E3" => ("P2, kappa = 5", vec![sweep(ProblemId::P2, &[H5, H6, H7], &[5.0]).with_preconditioners(&TABLE_COLUMNS)], vec![]),
        "E4" => ("P2, h = 2^-6", vec![sweep(ProblemId::P2, &[H6], &[0.8, 2.0, 5.0]).with_preconditioners(&TABLE_COLUMNS)], vec![]),
        "E5" => (
            "P4, kappa = mu sqrt(2)",
            vec![sweep(ProblemId::P4, &[H5, H6, H7], &[1.0, 4.0, 6.0, 8.0]).with_preconditioners(&TABLE_COLUMNS)],
            vec![],
        ),
        "E6" => {
            let mut c = sweep(ProblemId::P2, &[H5], &[2.0, 5.0, 7.0, 10.0]);
            c.solvers = vec![SolverId::Gmres, SolverId::Bicgstab];
            ("GMRES versus BiCGSTAB with the FMM preconditioner, P2, h = 2^-5", vec![c], vec![])
        }
        "E7" => {
            let mut precision = sweep(ProblemId::P2, &[H5], &[7.0]).with_preconditioners(&[Fmm, Gmg, Ic]);
            precision.epsilons = vec![Some(1e-2), Some(1e-4), Some(1e-6)];
            let mut plain = sweep(ProblemId::P2, &[H5], &[0.0, 15.0]).with_preconditioners(&[None]);
            plain.maxit = 100;
            plain.restart = 100;
            ("FMM precision against convergence, and unpreconditioned GMRES, P2, h = 2^-5", vec![precision, plain], vec![])
        }
        "E8" => {
            let mut cells = sweep(ProblemId::P1, &[H5], &[5.0, 10.0, 20.0, 40.0]).with_preconditioners(&[None]).cells()?;
            cells.extend(sweep(ProblemId::P2, &[H5], &[7.0]).with_preconditioners(&[None]).cells()?);
            let mut fmm = sweep(ProblemId::P2, &[H5], &[7.0]);
            fmm.epsilons = vec![Some(1e-2), Some(1e-4), Some(1e-6)];
            cells.extend(fmm.cells()?);
            ("Spectra of A (P1) and of the FMM-preconditioned P2 operator, h = 2^-5", vec![], cells)
        }
        other => bail!("unknown experiment {other:?} (expected one of {})", EXPERIMENT_IDS.join(", ")),
    };
    Ok(Experiment { id, title: title.to_string(), sweeps, spectra })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    /// Write measured wall times instead of zeros.
    pub timings: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub spectra: Vec<SpectrumResult>,
    pub files: Vec<PathBuf>,
}

fn history_series(rows: &[ResultRow]) -> Vec<(String, Vec<f64>)> {
    rows.iter()
        .map(|r| {
            let c = &r.cell;
            let mut label = format!("{} h=1/{} k={}", c.preconditioner, (1.0 / c.h).round(), c.problem.kappa);
            if let Some(e) = c.epsilon {
                label.push_str(&format!(" eps={e:e}"));
            }
            if c.solver != SolverId::Gmres {
                label.push_str(&format!(" {}", c.solver.name()));
            }
            (label, r.residual_history.clone())
        })
        .collect()
}

/// Runs every sweep and spectrum job and writes `<id>.csv`, `<id>.md`, one
/// convergence plot per sweep and the spectrum files.
pub fn run_experiment(exp: &Experiment, out_dir: &Path, opts: RunOptions) -> Result<ExperimentOutput> {
    let stem_id = exp.id.to_lowercase();
    let mut out = ExperimentOutput::default();
    let mut md = format!("# {}: {}\n\n", exp.id, exp.title);
    for (k, sweep) in exp.sweeps.iter().enumerate() {
        let mut rows = run_cells(&sweep.cells()?);
        sort_rows(&mut rows);
        let svg = out_dir.join(format!("{stem_id}_sweep{}_convergence.svg", k + 1));
        report::write(&svg, &convergence_svg(&format!("{} sweep {}", exp.id, k + 1), &history_series(&rows)))?;
        out.files.push(svg);
        md.push_str(&summary_markdown(&format!("Sweep {}", k + 1), &rows));
        md.push('\n');
        out.rows.extend(rows);
    }
    if !exp.sweeps.is_empty() {
        let csv = out_dir.join(format!("{stem_id}.csv"));
        report::write_csv(&out.rows, &csv, opts.timings)?;
        out.files.push(csv);
    }
    if !exp.spectra.is_empty() {
        let mut summary = format!("{SUMMARY_HEADER}\n");
        let mut plotted = Vec::new();
        let results = exp.spectra.par_iter().map(run_spectrum).collect::<Result<Vec<_>>>()?;
        for r in results {
            let cell = &r.cell.clone();
            let s = stem(cell);
            let path = out_dir.join(format!("{s}.csv"));
            report::write(&path, &eigenvalue_csv(&r.report.eigenvalues))?;
            out.files.push(path);
            let label = match cell.epsilon {
                Some(e) => format!("M^-1 A eps={e:e}"),
                None => format!("A k={}", cell.problem.kappa),
            };
            let svg = out_dir.join(format!("{s}.svg"));
            report::write(&svg, &scatter_svg(&format!("{} {}", cell.problem.id.name(), label), &[(label.clone(), r.report.eigenvalues.clone())]))?;
            out.files.push(svg);
            summary.push_str(&summary_line(&r));
            summary.push('\n');
            md.push_str(&format!(
                "- {} {}: negative real parts {}, min |λ| {:.4e}, max |λ| {:.4e}, max |λ-1| {:.4e}\n",
                cell.problem.id.name(),
                label,
                r.report.n_negative_real,
                r.report.min_abs,
                r.report.max_abs,
                r.report.cluster_radius
            ));
            plotted.push((label, r.report.eigenvalues.clone()));
            out.spectra.push(r);
        }
        let svg = out_dir.join(format!("{stem_id}_spectra.svg"));
        report::write(&svg, &scatter_svg(&format!("{} spectra", exp.id), &plotted))?;
        out.files.push(svg);
        let path = out_dir.join(format!("{stem_id}_spectra.csv"));
        report::write(&path, &summary)?;
        out.files.push(path);
    }
    let path = out_dir.join(format!("{stem_id}.md"));
    report::write(&path, &md)?;
    out.files.push(path);
    Ok(out)
}
