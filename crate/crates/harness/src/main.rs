use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use hfp_core::discretize::{build_system, Grid, ProblemId, ProblemSpec};
use hfp_harness::catalog::{experiment, run_experiment, Experiment, RunOptions, EXPERIMENT_IDS};
use hfp_harness::config::{parse_element, parse_problem, ConfigFile};
use hfp_harness::report::{self, csv_string, sort_rows};
use hfp_harness::{matrix_market, selftest};

#[derive(Parser)]
#[command(name = "hfp", version, about = "FMM/BEM preconditioned Helmholtz solver experiments")]
struct Cli {
    /// Output directory. Overrides `out_dir` in config files.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Overrides `seed` in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Write measured wall times to the CSV (otherwise 0).
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one catalog experiment (E1-E8).
    Run { id: String },
    /// Run the whole catalog.
    RunAll,
    /// Solve every cell of a config file.
    Solve { config: PathBuf },
    /// Compute spectra for every cell of a config file.
    Spectrum { config: PathBuf },
    /// Write the matrix and right-hand side of one problem in Matrix Market format.
    ExportMatrix(ExportArgs),
    /// Quick numerical self-checks.
    Selftest,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    problem: String,
    #[arg(long, default_value = "q1")]
    element: String,
    #[arg(long)]
    h: f64,
    #[arg(long)]
    kappa: Option<f64>,
    #[arg(long)]
    mu: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

const DEFAULT_OUT_DIR: &str = "results";

fn out_dir(cli: &Cli, file: Option<&str>) -> PathBuf {
    cli.out_dir.clone().or_else(|| file.map(PathBuf::from)).unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn load_config(cli: &Cli, path: &PathBuf) -> Result<(ConfigFile, PathBuf)> {
    let mut cfg = ConfigFile::load(path)?;
    if let Some(seed) = cli.seed {
        for s in &mut cfg.sections {
            s.seed = seed;
        }
    }
    let dir = out_dir(cli, cfg.out_dir.as_deref());
    Ok((cfg, dir))
}

fn run(cli: &Cli) -> Result<bool> {
    let opts = RunOptions { timings: cli.timings };
    let seed = cli.seed.unwrap_or(0);
    match &cli.command {
        Command::Run { id } => {
            let out = run_experiment(&experiment(id, seed)?, &out_dir(cli, None), opts)?;
            report_files(&out.files);
        }
        Command::RunAll => {
            let dir = out_dir(cli, None);
            let mut rows = Vec::new();
            for id in EXPERIMENT_IDS {
                log::info!("running {id}");
                let out = run_experiment(&experiment(id, seed)?, &dir, opts)?;
                report_files(&out.files);
                rows.extend(out.rows);
            }
            sort_rows(&mut rows);
            let path = dir.join("all_results.csv");
            report::write(&path, &csv_string(&rows, cli.timings))?;
            report_files(&[path]);
        }
        Command::Solve { config } => {
            let (cfg, dir) = load_config(cli, config)?;
            for section in cfg.sections {
                let exp = Experiment { id: section.experiment.clone(), title: section.experiment.clone(), sweeps: vec![section], spectra: vec![] };
                report_files(&run_experiment(&exp, &dir, opts)?.files);
            }
        }
        Command::Spectrum { config } => {
            let (cfg, dir) = load_config(cli, config)?;
            for section in cfg.sections {
                let exp = Experiment { id: section.experiment.clone(), title: section.experiment.clone(), sweeps: vec![], spectra: section.cells()? };
                report_files(&run_experiment(&exp, &dir, opts)?.files);
            }
        }
        Command::ExportMatrix(a) => {
            let problem = match (parse_problem(&a.problem)?, a.kappa, a.mu) {
                (ProblemId::P4, None, Some(mu)) => ProblemSpec::p4(mu),
                (ProblemId::P4, _, _) => bail!("P4 needs --mu and no --kappa"),
                (id, Some(k), None) => ProblemSpec::new(id, k),
                (_, _, _) => bail!("give --kappa (or --mu for P4)"),
            }
            .map_err(|e| anyhow!("{e}"))?;
            let grid = Grid::for_problem(&problem, a.h).map_err(|e| anyhow!("{e}"))?;
            let system = build_system(&problem, grid, parse_element(&a.element)?).map_err(|e| anyhow!("{e}"))?;
            let rhs = matrix_market::export(&system.matrix, &system.rhs, &a.out)?;
            report_files(&[a.out.clone(), rhs]);
        }
        Command::Selftest => {
            let checks = selftest::run(seed);
            for c in &checks {
                println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
            }
            return Ok(checks.iter().all(|c| c.passed));
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring the thread pool") {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
