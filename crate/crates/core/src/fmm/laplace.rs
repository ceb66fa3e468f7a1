//! Complex-variable expansions for the 2D Laplace kernel.
//!
//! Expansions represent the analytic potential `Phi(z) = sum_i q_i log(z - z_i)`
//! (dipoles: `sum_i q_i n_i . grad_{z_i} log(z - z_i)`); for real strengths the
//! physical potential is `-Re(Phi) / (2 pi)`.
//!
//! * multipole: `Phi(z) = a_0 log(z - c) + sum_{k>=1} a_k (z - c)^{-k}`
//! * local: `Phi(z) = sum_{l>=0} b_l (z - c)^l`

use num_complex::Complex64;

use crate::geometry::Point2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct LaplaceExpander {
    pub order: usize,
}

fn cplx(p: Point2) -> Complex64 {
    Complex64::new(p.x, p.y)
}

impl LaplaceExpander {
    pub fn len(&self) -> usize {
        self.order + 1
    }

    pub fn source_basis(&self, rel: Point2, normal: Option<Point2>, out: &mut [Complex64]) {
        let z = cplx(rel);
        match normal {
            None => {
                out[0] = Complex64::new(1.0, 0.0);
                let mut zk = Complex64::new(1.0, 0.0);
                for (k, o) in out.iter_mut().enumerate().skip(1) {
                    zk *= z;
                    *o = -zk / k as f64;
                }
            }
            Some(n) => {
                let nu = cplx(n);
                out[0] = Complex64::default();
                let mut zk = Complex64::new(1.0, 0.0);
                for o in out.iter_mut().skip(1) {
                    *o = -nu * zk;
                    zk *= z;
                }
            }
        }
    }

    pub fn target_basis(&self, rel: Point2, out: &mut [Complex64]) {
        let z = cplx(rel);
        let mut zk = Complex64::new(1.0, 0.0);
        for o in out.iter_mut() {
            *o = zk;
            zk *= z;
        }
    }

    pub fn multipole_eval_basis(&self, rel: Point2, out: &mut [Complex64]) {
        let z = cplx(rel);
        out[0] = z.ln();
        let inv = z.inv();
        let mut zk = Complex64::new(1.0, 0.0);
        for o in out.iter_mut().skip(1) {
            zk *= inv;
            *o = zk;
        }
    }

    /// Multipole shift, `d = c_child - c_parent`.
    pub fn m2m(&self, d: Point2) -> Vec<Complex64> {
        let n = self.len();
        let z0 = cplx(d);
        let binom = binomials(2 * n);
        let pow = powers(z0, n);
        let mut t = vec![Complex64::default(); n * n];
        t[0] = Complex64::new(1.0, 0.0);
        for l in 1..n {
            t[l * n] = -pow[l] / l as f64;
            for k in 1..=l {
                t[l * n + k] = pow[l - k] * binom[l - 1][k - 1];
            }
        }
        t
    }

    /// Multipole to local, `b = c_target - c_source`.
    pub fn m2l(&self, b: Point2) -> Vec<Complex64> {
        let n = self.len();
        let z0 = -cplx(b);
        let binom = binomials(2 * n);
        let inv = powers(z0.inv(), n);
        let mut t = vec![Complex64::default(); n * n];
        t[0] = (-z0).ln();
        for k in 1..n {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            t[k] = sign * inv[k];
        }
        for l in 1..n {
            t[l * n] = -inv[l] / l as f64;
            for k in 1..n {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                t[l * n + k] = sign * binom[l + k - 1][k - 1] * inv[l] * inv[k];
            }
        }
        t
    }

    /// Local shift, `d = c_child - c_parent`.
    pub fn l2l(&self, d: Point2) -> Vec<Complex64> {
        let n = self.len();
        let s = cplx(d);
        let binom = binomials(2 * n);
        let pow = powers(s, n);
        let mut t = vec![Complex64::default(); n * n];
        for l in 0..n {
            for k in l..n {
                t[l * n + k] = pow[k - l] * binom[k][l];
            }
        }
        t
    }
}

fn powers(z: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut acc = Complex64::new(1.0, 0.0);
    for _ in 0..n {
        out.push(acc);
        acc *= z;
    }
    out
}

fn binomials(n: usize) -> Vec<Vec<f64>> {
    let mut c = vec![vec![0.0; n + 1]; n + 1];
    for i in 0..=n {
        c[i][0] = 1.0;
        for j in 1..=i {
            c[i][j] = c[i - 1][j - 1] + if j < i { c[i - 1][j] } else { 0.0 };
        }
    }
    c
}
