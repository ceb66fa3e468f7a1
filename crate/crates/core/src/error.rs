use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("argument outside the function domain: {0}")]
    Domain(String),
    #[error("kernel evaluated at coincident source and target")]
    Singular,
    #[error(
        "tree construction failed: {count} bodies still share a cell at max level {max_level}"
    )]
    Degenerate { count: usize, max_level: usize },
    #[error("inner boundary solve stopped after {iterations} iterations at relative residual {residual:.3e}")]
    InnerSolve { iterations: usize, residual: f64 },
    #[error("krylov breakdown: {0}")]
    Breakdown(&'static str),
    #[error("incomplete factorization failed for every diagonal shift")]
    Factorization,
    #[error("dense size guard exceeded: n = {n} > {limit}")]
    Size { n: usize, limit: usize },
    #[error("iteration did not converge within {0} sweeps")]
    NoConvergence(usize),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
