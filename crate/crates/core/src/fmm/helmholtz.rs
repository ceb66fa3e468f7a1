//! Low-frequency 2D Helmholtz expansions in the Graf basis.
//!
//! With `R_m(v) = J_m(k|v|) e^{im arg v}` and `S_m(v) = H^1_m(k|v|) e^{im arg v}`:
//!
//! * multipole about `c`: `u(y) = (i/4) sum_m M_m S_m(y - c)`,
//!   `M_m = sum_i w_i conj(R_m)(x_i - c)`
//! * local about `c`: `u(y) = sum_m L_m R_m(y - c)`
//!
//! Coefficients are stored for `m = -p..=p` at index `m + p`.

use num_complex::Complex64;

use crate::geometry::Point2;
use crate::special::{fill_bessel_j, fill_bessel_y};

const I_QUARTER: Complex64 = Complex64::new(0.0, 0.25);

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HelmholtzExpander {
    pub order: usize,
    pub kappa: f64,
}

impl HelmholtzExpander {
    pub fn len(&self) -> usize {
        2 * self.order + 1
    }

    /// `out[j + jmax] = R_j(v)` (or its conjugate) for `j = -jmax..=jmax`.
    fn regular(&self, v: Point2, jmax: usize, conjugate: bool, out: &mut [Complex64]) {
        let mut j = vec![0.0; jmax + 1];
        fill_bessel_j(self.kappa * v.norm(), &mut j);
        let phi = if conjugate { -v.angle() } else { v.angle() };
        fill_signed(&j, phi, jmax, out);
    }

    /// `out[j + jmax] = S_j(v)` for `j = -jmax..=jmax`; `v != 0`.
    fn singular(&self, v: Point2, jmax: usize, out: &mut [Complex64]) {
        let x = self.kappa * v.norm();
        let mut jv = vec![0.0; jmax + 1];
        let mut yv = vec![0.0; jmax + 1];
        fill_bessel_j(x, &mut jv);
        fill_bessel_y(x, &mut yv);
        let h: Vec<Complex64> = jv
            .iter()
            .zip(&yv)
            .map(|(&a, &b)| Complex64::new(a, b))
            .collect();
        fill_signed(&h, v.angle(), jmax, out);
    }

    /// Multipole coefficients of a unit source at `rel = x - c`; a unit
    /// dipole when `normal` is given.
    pub fn source_basis(&self, rel: Point2, normal: Option<Point2>, out: &mut [Complex64]) {
        let p = self.order;
        match normal {
            None => self.regular(rel, p, true, out),
            Some(n) => {
                // n . grad conj(R_m) = (k/2) [conj(nu) conj(R_{m-1}) - nu conj(R_{m+1})]
                let mut wide = vec![Complex64::default(); 2 * p + 3];
                self.regular(rel, p + 1, true, &mut wide);
                let nu = Complex64::new(n.x, n.y);
                let half_k = 0.5 * self.kappa;
                for (idx, o) in out.iter_mut().enumerate() {
                    // wide index of order m is m + p + 1 = idx + 1
                    *o = half_k * (nu.conj() * wide[idx] - nu * wide[idx + 2]);
                }
            }
        }
    }

    /// Local-expansion evaluation weights at `rel = y - c`.
    pub fn target_basis(&self, rel: Point2, out: &mut [Complex64]) {
        self.regular(rel, self.order, false, out);
    }

    /// Multipole evaluation weights at `rel = y - c`, including the `i/4`.
    pub fn multipole_eval_basis(&self, rel: Point2, out: &mut [Complex64]) {
        self.singular(rel, self.order, out);
        for o in out.iter_mut() {
            *o *= I_QUARTER;
        }
    }

    /// `M'_m = sum_n M_n conj(R)_{m-n}(d)`, `d = c_child - c_parent`.
    pub fn m2m(&self, d: Point2) -> Vec<Complex64> {
        let p = self.order;
        let mut t = vec![Complex64::default(); 4 * p + 1];
        self.regular(d, 2 * p, true, &mut t);
        toeplitz(p, |m, n| t[(m - n + 2 * p as isize) as usize])
    }

    /// `L_k = (i/4) sum_n M_n S_{n-k}(b)`, `b = c_target - c_source`.
    pub fn m2l(&self, b: Point2) -> Vec<Complex64> {
        let p = self.order;
        let mut t = vec![Complex64::default(); 4 * p + 1];
        self.singular(b, 2 * p, &mut t);
        toeplitz(p, |k, n| I_QUARTER * t[(n - k + 2 * p as isize) as usize])
    }

    /// `L'_j = sum_k L_k R_{k-j}(d)`, `d = c_child - c_parent`.
    pub fn l2l(&self, d: Point2) -> Vec<Complex64> {
        let p = self.order;
        let mut t = vec![Complex64::default(); 4 * p + 1];
        self.regular(d, 2 * p, false, &mut t);
        toeplitz(p, |j, k| t[(k - j + 2 * p as isize) as usize])
    }
}

/// Expands non-negative orders `z[0..=jmax]` into signed orders using
/// `Z_{-m} = (-1)^m Z_m` and multiplies by `e^{i m phi}`.
fn fill_signed(z: &[impl Into<Complex64> + Copy], phi: f64, jmax: usize, out: &mut [Complex64]) {
    let step = Complex64::from_polar(1.0, phi);
    let mut rot = Complex64::new(1.0, 0.0);
    out[jmax] = z[0].into();
    for m in 1..=jmax {
        rot *= step;
        let zm: Complex64 = z[m].into();
        out[jmax + m] = zm * rot;
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        out[jmax - m] = sign * zm * rot.conj();
    }
}

/// Row-major `(2p+1)^2` matrix with entries `f(row_order, col_order)`.
fn toeplitz(p: usize, f: impl Fn(isize, isize) -> Complex64) -> Vec<Complex64> {
    let n = 2 * p + 1;
    let p = p as isize;
    let mut out = Vec::with_capacity(n * n);
    for r in -p..=p {
        for c in -p..=p {
            out.push(f(r, c));
        }
    }
    out
}
