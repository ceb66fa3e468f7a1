use num_complex::Complex64;

use crate::discretize::CsrMatrix;
use crate::error::{Error, Result};
use crate::krylov::Preconditioner;

/// Diagonal shifts tried after a pivot breakdown, relative to `max |a_ii|`.
pub const IC_SHIFTS: [f64; 4] = [1e-3, 1e-2, 1e-1, 1.0];

/// `A + alpha I ~ L L^T` with the sparsity of `lower(A)`.
///
/// Complex symmetric matrices use the unconjugated transpose, and a pivot
/// counts as positive when its real part is.
#[derive(Debug, Clone, PartialEq)]
pub struct IcFactors {
    /// Lower triangle by rows, diagonal last in each row.
    pub lower: CsrMatrix,
    /// Shift applied, zero when the unshifted factorization succeeded.
    pub shift: f64,
}

/// Zero-fill incomplete Cholesky, retried with growing diagonal shifts when a
/// pivot is not positive.
pub fn ic0(a: &CsrMatrix) -> Result<IcFactors> {
    if a.nrows != a.ncols {
        return Err(Error::Dimension { expected: a.nrows, got: a.ncols });
    }
    for i in 0..a.nrows {
        for (j, _) in a.row(i) {
            if !has_entry(a, j, i) {
                return Err(Error::Domain(format!("pattern is not symmetric at ({i}, {j})")));
            }
        }
    }
    let diag_max = a.diagonal().iter().map(|d| d.norm()).fold(0.0, f64::max);
    let shifts = std::iter::once(0.0).chain(IC_SHIFTS.iter().map(|s| s * diag_max));
    for shift in shifts {
        if let Some(lower) = factor(a, shift) {
            return Ok(IcFactors { lower, shift });
        }
        log::debug!("incomplete Cholesky broke down at shift {shift:e}");
    }
    Err(Error::Factorization)
}

fn has_entry(a: &CsrMatrix, i: usize, j: usize) -> bool {
    a.col_idx[a.row_ptr[i]..a.row_ptr[i + 1]].binary_search(&j).is_ok()
}

fn factor(a: &CsrMatrix, shift: f64) -> Option<CsrMatrix> {
    let n = a.nrows;
    let mut row_ptr = vec![0];
    let mut col_idx: Vec<usize> = Vec::new();
    let mut values: Vec<Complex64> = Vec::new();
    for i in 0..n {
        let start = values.len();
        for (k, aik) in a.row(i).filter(|&(k, _)| k <= i) {
            // Sum of L[i, j] L[k, j] over the shared pattern with j < k.
            let mut s = Complex64::default();
            let (mut p, mut q) = (start, row_ptr[k]);
            let q_end = if k == i { values.len() } else { row_ptr[k + 1] - 1 };
            let p_end = values.len();
            while p < p_end && q < q_end {
                match col_idx[p].cmp(&col_idx[q]) {
                    std::cmp::Ordering::Less => p += 1,
                    std::cmp::Ordering::Greater => q += 1,
                    std::cmp::Ordering::Equal => {
                        s += values[p] * values[q];
                        p += 1;
                        q += 1;
                    }
                }
            }
            let v = if k == i {
                let pivot = aik + shift - s;
                if !(pivot.re > 0.0) || !pivot.is_finite() {
                    return None;
                }
                pivot.sqrt()
            } else {
                (aik - s) / values[row_ptr[k + 1] - 1]
            };
            col_idx.push(k);
            values.push(v);
        }
        if col_idx.last() != Some(&i) || values.len() == start {
            // Structurally zero diagonal.
            return None;
        }
        row_ptr.push(values.len());
    }
    Some(CsrMatrix { nrows: n, ncols: n, row_ptr, col_idx, values })
}

impl IcFactors {
    /// Solves `L L^T z = r`.
    pub fn solve(&self, r: &[Complex64]) -> Vec<Complex64> {
        let l = &self.lower;
        let mut y = r.to_vec();
        for i in 0..l.nrows {
            let (lo, hi) = (l.row_ptr[i], l.row_ptr[i + 1] - 1);
            let s: Complex64 = (lo..hi).map(|p| l.values[p] * y[l.col_idx[p]]).sum();
            y[i] = (y[i] - s) / l.values[hi];
        }
        for i in (0..l.nrows).rev() {
            let (lo, hi) = (l.row_ptr[i], l.row_ptr[i + 1] - 1);
            y[i] /= l.values[hi];
            let yi = y[i];
            for p in lo..hi {
                y[l.col_idx[p]] -= l.values[p] * yi;
            }
        }
        y
    }
}

impl Preconditioner for IcFactors {
    fn dim(&self) -> usize {
        self.lower.nrows
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        z.copy_from_slice(&self.solve(r));
    }
}
