//! Dense eigenvalue diagnostics for small operators.

mod eigen;

pub use eigen::{dense_eigenvalues, hessenberg};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::krylov::{LinearOperator, Preconditioner};
use crate::linalg::DenseMatrix;

/// Largest operator that may be materialized.
pub const MAX_DENSE: usize = 4096;

/// Dense matrix whose column `j` is `op(e_j)`.
pub fn materialize(op: &dyn LinearOperator) -> Result<DenseMatrix> {
    let n = op.dim();
    if n > MAX_DENSE {
        return Err(Error::Size { n, limit: MAX_DENSE });
    }
    let columns: Vec<Vec<Complex64>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let mut e = vec![Complex64::default(); n];
            e[j] = Complex64::new(1.0, 0.0);
            let mut y = vec![Complex64::default(); n];
            op.apply(&e, &mut y);
            y
        })
        .collect();
    Ok(DenseMatrix::from_fn(n, n, |i, j| columns[j][i]))
}

/// `x -> M^{-1} A x`.
pub struct PreconditionedOperator<'a> {
    pub a: &'a dyn LinearOperator,
    pub m: &'a dyn Preconditioner,
}

impl LinearOperator for PreconditionedOperator<'_> {
    fn dim(&self) -> usize {
        self.a.dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let mut ax = vec![Complex64::default(); x.len()];
        self.a.apply(x, &mut ax);
        self.m.apply(&ax, y);
    }
}

/// Clustering metrics of a spectrum.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumReport {
    pub eigenvalues: Vec<Complex64>,
    /// Eigenvalues with `Re < 0`.
    pub n_negative_real: usize,
    pub min_abs: f64,
    pub max_abs: f64,
    /// `max |lambda - 1|`.
    pub cluster_radius: f64,
    pub median_abs: f64,
}

pub fn spectrum_report(eigenvalues: &[Complex64]) -> SpectrumReport {
    let mut abs: Vec<f64> = eigenvalues.iter().map(|l| l.norm()).collect();
    abs.sort_by(f64::total_cmp);
    let median_abs = match abs.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => abs[n / 2],
        n => 0.5 * (abs[n / 2 - 1] + abs[n / 2]),
    };
    SpectrumReport {
        eigenvalues: eigenvalues.to_vec(),
        n_negative_real: eigenvalues.iter().filter(|l| l.re < 0.0).count(),
        min_abs: abs.first().copied().unwrap_or(f64::NAN),
        max_abs: abs.last().copied().unwrap_or(f64::NAN),
        cluster_radius: eigenvalues.iter().map(|l| (l - 1.0).norm()).fold(0.0, f64::max),
        median_abs,
    }
}

#[cfg(test)]
mod tests;
