use num_complex::Complex64;

use super::MAX_DENSE;
use crate::error::{Error, Result};
use crate::linalg::DenseMatrix;

/// Upper Hessenberg form `Q^H A Q` by Householder reflections.
pub fn hessenberg(a: &DenseMatrix) -> Result<DenseMatrix> {
    if !a.is_square() {
        return Err(Error::Dimension { expected: a.rows, got: a.cols });
    }
    let n = a.rows;
    let mut h = a.clone();
    let mut v = vec![Complex64::default(); n];
    for k in 0..n.saturating_sub(2) {
        let norm = (k + 1..n).map(|i| h[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 {
            continue;
        }
        let x0 = h[(k + 1, k)];
        let phase = if x0.norm() == 0.0 { Complex64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        for i in k + 1..n {
            v[i] = h[(i, k)];
        }
        v[k + 1] -= alpha;
        let vnorm = (k + 1..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for i in k + 1..n {
            v[i] /= vnorm;
        }
        // Left: H -= 2 v (v^H H).
        for j in k..n {
            let s: Complex64 = (k + 1..n).map(|i| v[i].conj() * h[(i, j)]).sum();
            for i in k + 1..n {
                let vi = v[i];
                h[(i, j)] -= vi * s * 2.0;
            }
        }
        // Right: H -= 2 (H v) v^H.
        for i in 0..n {
            let s: Complex64 = (k + 1..n).map(|j| h[(i, j)] * v[j]).sum();
            for j in k + 1..n {
                let vj = v[j];
                h[(i, j)] -= s * vj.conj() * 2.0;
            }
        }
        for i in k + 2..n {
            h[(i, k)] = Complex64::default();
        }
    }
    Ok(h)
}

/// Rotation `[c, s; -conj(s), c]` mapping `(x, y)` to `(r, 0)`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let (ax, ay) = (x.norm(), y.norm());
    if ay == 0.0 {
        return (1.0, Complex64::default());
    }
    if ax == 0.0 {
        return (0.0, y.conj() / ay);
    }
    let nu = ax.hypot(ay);
    (ax / nu, (x / ax) * y.conj() / nu)
}

/// Eigenvalue of the 2x2 block `[a, b; c, d]` closest to `d`.
fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half = (a - d) * 0.5;
    let root = (half * half + b * c).sqrt();
    let (l1, l2) = ((a + d) * 0.5 + root, (a + d) * 0.5 - root);
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// All eigenvalues by Hessenberg reduction and implicitly shifted complex QR
/// with Wilkinson shifts, in deflation order.
pub fn dense_eigenvalues(a: &DenseMatrix) -> Result<Vec<Complex64>> {
    if a.rows > MAX_DENSE {
        return Err(Error::Size { n: a.rows, limit: MAX_DENSE });
    }
    let mut h = hessenberg(a)?;
    let n = h.rows;
    let mut eigenvalues = vec![Complex64::default(); n];
    if n == 0 {
        return Ok(eigenvalues);
    }
    let scale = h.norm().max(f64::MIN_POSITIVE);
    let max_sweeps = 100 * n;
    let mut sweeps = 0;
    let mut since_deflation = 0;
    let mut hi = n - 1;
    loop {
        let mut lo = hi;
        while lo > 0 {
            let sub = h[(lo, lo - 1)].norm();
            let mut diag = h[(lo - 1, lo - 1)].norm() + h[(lo, lo)].norm();
            if diag == 0.0 {
                diag = scale;
            }
            if sub <= f64::EPSILON * diag {
                h[(lo, lo - 1)] = Complex64::default();
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            eigenvalues[hi] = h[(hi, hi)];
            if hi == 0 {
                break;
            }
            hi -= 1;
            since_deflation = 0;
            continue;
        }
        sweeps += 1;
        since_deflation += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence(max_sweeps));
        }
        let shift = if since_deflation % 11 == 0 {
            // Exceptional shift against cycling.
            h[(hi, hi)] + h[(hi, hi - 1)].norm() * 1.5
        } else {
            wilkinson_shift(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };
        let (mut x, mut y) = (h[(lo, lo)] - shift, h[(lo + 1, lo)]);
        for k in lo..hi {
            if k > lo {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            for j in k.saturating_sub(1).max(lo)..=hi {
                let (p, q) = (h[(k, j)], h[(k + 1, j)]);
                h[(k, j)] = p * c + s * q;
                h[(k + 1, j)] = -s.conj() * p + q * c;
            }
            for i in lo..=(k + 2).min(hi) {
                let (p, q) = (h[(i, k)], h[(i, k + 1)]);
                h[(i, k)] = p * c + q * s.conj();
                h[(i, k + 1)] = -p * s + q * c;
            }
            if k > lo {
                h[(k + 1, k - 1)] = Complex64::default();
            }
        }
    }
    Ok(eigenvalues)
}
