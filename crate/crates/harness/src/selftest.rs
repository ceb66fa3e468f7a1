//! Quick checks of the numerical kernels, run by `hfp selftest`.

use hfp_core::discretize::{build_system, Grid, ProblemId, ProblemSpec};
use hfp_core::fmm::{evaluate, FmmConfig};
use hfp_core::geometry::Point2;
use hfp_core::special::{bessel_j, bessel_y, Kernel};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::{Cell, ExperimentConfig, PreconditionerId};
use crate::matrix_market::{matrix_string, parse_matrix};
use crate::runner::run_cell;

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn wronskian() -> Check {
    let worst = [0.3, 1.0, 4.5, 12.0, 40.0]
        .iter()
        .map(|&x: &f64| {
            let w = bessel_j(1, x).unwrap() * bessel_y(0, x).unwrap() - bessel_j(0, x).unwrap() * bessel_y(1, x).unwrap();
            let expected = 2.0 / (std::f64::consts::PI * x);
            ((w - expected) / expected).abs()
        })
        .fold(0.0, f64::max);
    check("bessel wronskian", worst < 1e-12, format!("max relative deviation {worst:.2e}"))
}

fn fmm_accuracy(seed: u64) -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point2> = (0..500).map(|_| Point2::new(rng.gen(), rng.gen())).collect();
    let charges: Vec<Complex64> = (0..500).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect();
    let kernel = Kernel::helmholtz_2d(10.0).unwrap();
    let run = || -> hfp_core::error::Result<f64> {
        let fast = evaluate(&points, &charges, &points, &FmmConfig::new(kernel))?;
        let exact = evaluate(&points, &charges, &points, &FmmConfig::direct(kernel))?;
        let num: f64 = fast.iter().zip(&exact).map(|(a, b)| (a - b).norm_sqr()).sum();
        let den: f64 = exact.iter().map(|b| b.norm_sqr()).sum();
        Ok((num / den).sqrt())
    };
    match run() {
        Ok(err) => check("fmm against direct sum", err <= 1e-5, format!("relative error {err:.2e} (N = 500, kappa = 10, p = 6)")),
        Err(e) => check("fmm against direct sum", false, e.to_string()),
    }
}

fn matrix_market_round_trip() -> Check {
    let problem = ProblemSpec::new(ProblemId::P1, 5.0).unwrap();
    let system = build_system(&problem, Grid::for_problem(&problem, 1.0 / 16.0).unwrap(), Default::default()).unwrap();
    match parse_matrix(&matrix_string(&system.matrix)) {
        Ok(back) => {
            let same = back == system.matrix;
            check("matrix market round trip", same, format!("dimension {}", system.dim()))
        }
        Err(e) => check("matrix market round trip", false, e.to_string()),
    }
}

fn preconditioned_solve() -> Vec<Check> {
    let cells: Vec<Cell> = ExperimentConfig::new("selftest", ProblemId::P1, vec![1.0 / 16.0], vec![5.0])
        .with_preconditioners(&[PreconditionerId::Fmm, PreconditionerId::Gmg, PreconditionerId::Ic])
        .cells()
        .expect("static config");
    cells
        .iter()
        .map(|cell| {
            let row = run_cell(cell);
            check(
                match cell.preconditioner {
                    PreconditionerId::Fmm => "fmm-preconditioned gmres",
                    PreconditionerId::Gmg => "gmg-preconditioned gmres",
                    _ => "ic-preconditioned gmres",
                },
                row.converged,
                format!("{} iterations, residual {:.2e}", row.iterations, row.final_residual),
            )
        })
        .collect()
}

pub fn run(seed: u64) -> Vec<Check> {
    let mut checks = vec![wronskian(), fmm_accuracy(seed), matrix_market_round_trip()];
    checks.extend(preconditioned_solve());
    checks
}
