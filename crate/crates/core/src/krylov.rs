//! Right-preconditioned restarted GMRES and BiCGSTAB.
//!
//! Both solvers start from `x0` (zero by default), record the relative true
//! residual `||b - A x_k|| / ||b||` after every iteration and count one
//! iteration per preconditioned matvec step.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{dotc, norm2, DenseMatrix};

/// `y = A x`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
}

/// `z = M^{-1} r`.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[Complex64], z: &mut [Complex64]);
}

impl LinearOperator for DenseMatrix {
    fn dim(&self) -> usize {
        self.rows
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        y.copy_from_slice(&self.matvec(x));
    }
}

impl<T: LinearOperator + ?Sized> LinearOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        (**self).apply(x, y)
    }
}

impl<T: Preconditioner + ?Sized> Preconditioner for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        (**self).apply(r, z)
    }
}

/// Operator defined by a closure.
pub struct FnOperator<F> {
    n: usize,
    f: F,
}

impl<F: Fn(&[Complex64], &mut [Complex64]) + Sync> FnOperator<F> {
    pub fn new(n: usize, f: F) -> Self {
        Self { n, f }
    }
}

impl<F: Fn(&[Complex64], &mut [Complex64]) + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        (self.f)(x, y)
    }
}

impl<F: Fn(&[Complex64], &mut [Complex64]) + Sync> Preconditioner for FnOperator<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        (self.f)(r, z)
    }
}

/// Dense matrix used as an explicit `M^{-1}`.
pub struct DensePreconditioner(pub DenseMatrix);

impl Preconditioner for DensePreconditioner {
    fn dim(&self) -> usize {
        self.0.rows
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        z.copy_from_slice(&self.0.matvec(r));
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[Complex64], z: &mut [Complex64]) {
        z.copy_from_slice(r);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// Operator applications, including residual checks.
    pub matvecs: usize,
    pub preconditioner_applies: usize,
    /// Relative true residuals, starting with the initial guess.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub solution: Vec<Complex64>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().expect("history holds the initial residual")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmresOptions {
    pub tol: f64,
    pub restart: usize,
    /// Total Arnoldi steps across all restart cycles.
    pub max_iters: usize,
    pub x0: Option<Vec<Complex64>>,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self { tol: 1e-6, restart: 20, max_iters: 20, x0: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BicgstabOptions {
    pub tol: f64,
    pub max_iters: usize,
    pub x0: Option<Vec<Complex64>>,
}

impl Default for BicgstabOptions {
    fn default() -> Self {
        Self { tol: 1e-6, max_iters: 20, x0: None }
    }
}

fn check_dims(a: &dyn LinearOperator, m: &dyn Preconditioner, b: &[Complex64], x0: Option<&[Complex64]>) -> Result<f64> {
    let n = a.dim();
    for got in [b.len(), m.dim()].into_iter().chain(x0.map(<[_]>::len)) {
        if got != n {
            return Err(Error::Dimension { expected: n, got });
        }
    }
    let bnorm = norm2(b);
    if !(bnorm > 0.0) || !bnorm.is_finite() {
        return Err(Error::Domain("right-hand side must be non-zero and finite".into()));
    }
    Ok(bnorm)
}

fn residual(a: &dyn LinearOperator, b: &[Complex64], x: &[Complex64], work: &mut [Complex64]) -> f64 {
    a.apply(x, work);
    b.iter().zip(work.iter()).map(|(bi, ai)| (bi - ai).norm_sqr()).sum::<f64>().sqrt()
}

/// Givens rotation zeroing `b` in `(a, b)`.
fn givens(a: Complex64, b: Complex64) -> (f64, Complex64) {
    if b == Complex64::default() {
        return (1.0, Complex64::default());
    }
    if a == Complex64::default() {
        return (0.0, b.conj() / b.norm());
    }
    let t = (a.norm_sqr() + b.norm_sqr()).sqrt();
    let c = a.norm() / t;
    let s = (a / a.norm()) * b.conj() / t;
    (c, s)
}

/// Modified Gram-Schmidt of `w` against `basis`; returns the Hessenberg
/// column with `||w||` appended (real) after orthogonalization.
fn orthogonalize(basis: &[Vec<Complex64>], w: &mut [Complex64]) -> Vec<Complex64> {
    let mut col = Vec::with_capacity(basis.len() + 1);
    for vi in basis {
        let hij = dotc(vi, w);
        for (wk, vk) in w.iter_mut().zip(vi) {
            *wk -= hij * vk;
        }
        col.push(hij);
    }
    col.push(Complex64::new(norm2(w), 0.0));
    col
}

/// Restarted GMRES with right preconditioning, modified Gram-Schmidt and
/// Givens least squares. The preconditioned basis vectors are kept so the
/// iterate is `x0 + Z y`.
pub fn gmres(
    a: &dyn LinearOperator,
    b: &[Complex64],
    m: &dyn Preconditioner,
    opts: &GmresOptions,
) -> Result<SolveReport> {
    let bnorm = check_dims(a, m, b, opts.x0.as_deref())?;
    if opts.restart == 0 {
        return Err(Error::Domain("restart length must be positive".into()));
    }
    let n = a.dim();
    let mut x = opts.x0.clone().unwrap_or_else(|| vec![Complex64::default(); n]);
    let mut work = vec![Complex64::default(); n];
    let mut matvecs = 1;
    let mut applies = 0;
    let mut history = vec![residual(a, b, &x, &mut work) / bnorm];
    let mut iterations = 0;
    let mut converged = history[0] <= opts.tol;
    let mut invariant = false;

    while !converged && !invariant && iterations < opts.max_iters {
        a.apply(&x, &mut work);
        matvecs += 1;
        let r: Vec<Complex64> = b.iter().zip(&work).map(|(bi, ai)| bi - ai).collect();
        let beta = norm2(&r);
        if beta == 0.0 {
            converged = true;
            break;
        }
        let m_steps = opts.restart.min(opts.max_iters - iterations);
        let mut v: Vec<Vec<Complex64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<Complex64>> = Vec::with_capacity(m_steps);
        // Column-major Hessenberg after rotations (upper triangular R).
        let mut h: Vec<Vec<Complex64>> = Vec::with_capacity(m_steps);
        let mut rot: Vec<(f64, Complex64)> = Vec::with_capacity(m_steps);
        let mut g = vec![Complex64::new(beta, 0.0)];
        let x_start = x.clone();

        for j in 0..m_steps {
            let mut zj = vec![Complex64::default(); n];
            m.apply(&v[j], &mut zj);
            applies += 1;
            let mut w = vec![Complex64::default(); n];
            a.apply(&zj, &mut w);
            matvecs += 1;
            z.push(zj);
            let mut col = orthogonalize(&v, &mut w);
            let hnext = col[j + 1].re;
            for (i, &(c, s)) in rot.iter().enumerate() {
                let (a0, a1) = (col[i], col[i + 1]);
                col[i] = c * a0 + s * a1;
                col[i + 1] = -s.conj() * a0 + c * a1;
            }
            let (c, s) = givens(col[j], col[j + 1]);
            col[j] = c * col[j] + s * col[j + 1];
            col[j + 1] = Complex64::default();
            rot.push((c, s));
            let gj = g[j];
            g[j] = c * gj;
            g.push(-s.conj() * gj);
            col.truncate(j + 1);
            h.push(col);
            iterations += 1;

            // Current iterate x_start + Z y with R y = g.
            let k = j + 1;
            let mut y = vec![Complex64::default(); k];
            for i in (0..k).rev() {
                let mut s = g[i];
                for l in i + 1..k {
                    s -= h[l][i] * y[l];
                }
                y[i] = s / h[i][i];
            }
            x.copy_from_slice(&x_start);
            for (yl, zl) in y.iter().zip(&z) {
                for (xi, zi) in x.iter_mut().zip(zl) {
                    *xi += yl * zi;
                }
            }
            let res = residual(a, b, &x, &mut work) / bnorm;
            matvecs += 1;
            history.push(res);
            if res <= opts.tol {
                converged = true;
                break;
            }
            if hnext == 0.0 {
                // Invariant subspace reached: further steps cannot improve x.
                invariant = true;
                break;
            }
            v.push(w.into_iter().map(|wi| wi / hnext).collect());
        }
    }
    Ok(SolveReport {
        iterations,
        matvecs,
        preconditioner_applies: applies,
        residual_history: history,
        converged,
        solution: x,
    })
}

/// BiCGSTAB with right preconditioning.
pub fn bicgstab(
    a: &dyn LinearOperator,
    b: &[Complex64],
    m: &dyn Preconditioner,
    opts: &BicgstabOptions,
) -> Result<SolveReport> {
    let bnorm = check_dims(a, m, b, opts.x0.as_deref())?;
    let n = a.dim();
    let mut x = opts.x0.clone().unwrap_or_else(|| vec![Complex64::default(); n]);
    let mut work = vec![Complex64::default(); n];
    a.apply(&x, &mut work);
    let mut matvecs = 1;
    let mut applies = 0;
    let mut r: Vec<Complex64> = b.iter().zip(&work).map(|(bi, ai)| bi - ai).collect();
    let mut history = vec![norm2(&r) / bnorm];
    let mut converged = history[0] <= opts.tol;
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0));
    let mut v = vec![Complex64::default(); n];
    let mut p = vec![Complex64::default(); n];
    let mut p_hat = vec![Complex64::default(); n];
    let mut s_hat = vec![Complex64::default(); n];
    let mut t = vec![Complex64::default(); n];
    let mut iterations = 0;

    while !converged && iterations < opts.max_iters {
        let rho_new = dotc(&r_hat, &r);
        if rho_new.norm() == 0.0 {
            return Err(Error::Breakdown("rho vanished"));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for ((pi, ri), vi) in p.iter_mut().zip(&r).zip(&v) {
            *pi = ri + beta * (*pi - omega * vi);
        }
        m.apply(&p, &mut p_hat);
        a.apply(&p_hat, &mut v);
        applies += 1;
        matvecs += 1;
        let denom = dotc(&r_hat, &v);
        if denom.norm() == 0.0 {
            return Err(Error::Breakdown("r_hat orthogonal to A p"));
        }
        alpha = rho_new / denom;
        let s: Vec<Complex64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
        for (xi, pi) in x.iter_mut().zip(&p_hat) {
            *xi += alpha * pi;
        }
        iterations += 1;
        if norm2(&s) / bnorm <= opts.tol {
            let res = residual(a, b, &x, &mut work) / bnorm;
            matvecs += 1;
            if res <= opts.tol {
                history.push(res);
                converged = true;
                break;
            }
        }
        m.apply(&s, &mut s_hat);
        a.apply(&s_hat, &mut t);
        applies += 1;
        matvecs += 1;
        let tt = dotc(&t, &t);
        omega = if tt.norm() == 0.0 { Complex64::default() } else { dotc(&t, &s) / tt };
        if omega.norm() == 0.0 {
            return Err(Error::Breakdown("omega vanished"));
        }
        for ((xi, si), ((ri, s_i), ti)) in x.iter_mut().zip(&s_hat).zip(r.iter_mut().zip(&s).zip(&t)) {
            *xi += omega * si;
            *ri = s_i - omega * ti;
        }
        rho = rho_new;
        let res = residual(a, b, &x, &mut work) / bnorm;
        matvecs += 1;
        history.push(res);
        converged = res <= opts.tol;
    }
    Ok(SolveReport {
        iterations,
        matvecs,
        preconditioner_applies: applies,
        residual_history: history,
        converged,
        solution: x,
    })
}

/// Unpreconditioned conjugate gradients for Hermitian positive definite `A`,
/// starting from zero. A zero right-hand side returns zero.
pub fn conjugate_gradient(a: &dyn LinearOperator, b: &[Complex64], tol: f64, max_iters: usize) -> Result<SolveReport> {
    let n = a.dim();
    if b.len() != n {
        return Err(Error::Dimension { expected: n, got: b.len() });
    }
    let mut x = vec![Complex64::default(); n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok(SolveReport {
            iterations: 0,
            matvecs: 0,
            preconditioner_applies: 0,
            residual_history: vec![0.0],
            converged: true,
            solution: x,
        });
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![Complex64::default(); n];
    let mut rr = bnorm * bnorm;
    let mut history = vec![1.0];
    let mut iterations = 0;
    while history[iterations] > tol && iterations < max_iters {
        a.apply(&p, &mut ap);
        let pap = dotc(&p, &ap).re;
        if !(pap > 0.0) {
            return Err(Error::Domain("operator is not positive definite".into()));
        }
        let alpha = rr / pap;
        for ((xi, ri), (pi, api)) in x.iter_mut().zip(r.iter_mut()).zip(p.iter().zip(&ap)) {
            *xi += pi * alpha;
            *ri -= api * alpha;
        }
        let rr_next = r.iter().map(|v| v.norm_sqr()).sum::<f64>();
        let beta = rr_next / rr;
        rr = rr_next;
        for (pi, ri) in p.iter_mut().zip(&r) {
            *pi = ri + *pi * beta;
        }
        iterations += 1;
        history.push(rr.sqrt() / bnorm);
    }
    Ok(SolveReport {
        iterations,
        matvecs: iterations,
        preconditioner_applies: 0,
        converged: history[iterations] <= tol,
        residual_history: history,
        solution: x,
    })
}
