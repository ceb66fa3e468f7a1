//! Small dense complex linear algebra: row-major matrices and LU solves.

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    pub rows: usize,
    pub cols: usize,
    /// Row-major entries.
    pub data: Vec<Complex64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex64::default(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(x).fold(Complex64::default(), |acc, (a, b)| acc + a * b))
            .collect()
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows);
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::default() {
                    continue;
                }
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(other.row(k)) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn lu(&self) -> Result<Lu> {
        Lu::factor(self)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.cols + j]
    }
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Debug, Clone)]
pub struct Lu {
    n: usize,
    lu: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension { expected: a.rows, got: a.cols });
        }
        let n = a.rows;
        let mut lu = a.data.clone();
        let mut pivots = Vec::with_capacity(n);
        let scale = a.data.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let (p, best) = (k..n)
                .map(|i| (i, lu[i * n + k].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best <= scale * 1e-300 || best == 0.0 {
                return Err(Error::Singular);
            }
            pivots.push(p);
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
            }
            let inv = lu[k * n + k].inv();
            for i in k + 1..n {
                let f = lu[i * n + k] * inv;
                lu[i * n + k] = f;
                if f != Complex64::default() {
                    for j in k + 1..n {
                        let u = lu[k * n + j];
                        lu[i * n + j] -= f * u;
                    }
                }
            }
        }
        Ok(Self { n, lu, pivots })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for i in 0..n {
            let mut s = x[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * x[j];
            }
            x[i] = s / self.lu[i * n + i];
        }
        x
    }

    pub fn inverse(&self) -> DenseMatrix {
        let n = self.n;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![Complex64::default(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = Complex64::default());
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.solve(&e).into_iter().enumerate() {
                inv[(i, j)] = v;
            }
        }
        inv
    }
}

/// Banded LU with partial pivoting for matrices with lower and upper
/// bandwidth `bw`; fill from pivoting widens the upper band to `2 bw`.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    bw: usize,
    /// Row `i` holds columns `i - bw ..= i + 2 bw` at offset `col + bw - i`.
    rows: Vec<Complex64>,
    pivots: Vec<usize>,
}

impl BandedLu {
    fn width(bw: usize) -> usize {
        3 * bw + 1
    }

    /// Factors an `n x n` matrix given as `(row, col, value)` entries with
    /// `|row - col| <= bw`.
    pub fn factor(n: usize, bw: usize, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let w = Self::width(bw);
        let mut rows = vec![Complex64::default(); n * w];
        for (i, j, v) in entries {
            if i.abs_diff(j) > bw {
                return Err(Error::Domain(format!("entry ({i}, {j}) outside bandwidth {bw}")));
            }
            rows[i * w + j + bw - i] += v;
        }
        let at = |i: usize, j: usize| i * w + j + bw - i;
        let mut pivots = Vec::with_capacity(n);
        let scale = rows.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for k in 0..n {
            let last = (k + bw).min(n - 1);
            let (p, best) = (k..=last)
                .map(|i| (i, rows[at(i, k)].norm()))
                .fold((k, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best == 0.0 || best <= scale * 1e-300 {
                return Err(Error::Singular);
            }
            pivots.push(p);
            let jmax = (k + 2 * bw).min(n - 1);
            if p != k {
                for j in k..=jmax {
                    rows.swap(at(k, j), at(p, j));
                }
            }
            let inv = rows[at(k, k)].inv();
            for i in k + 1..=last {
                let f = rows[at(i, k)] * inv;
                if f == Complex64::default() {
                    continue;
                }
                rows[at(i, k)] = f;
                for j in k + 1..=jmax {
                    let u = rows[at(k, j)];
                    rows[at(i, j)] -= f * u;
                }
            }
        }
        Ok(Self { n, bw, rows, pivots })
    }

    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let (n, bw, w) = (self.n, self.bw, Self::width(self.bw));
        assert_eq!(b.len(), n);
        let at = |i: usize, j: usize| i * w + j + bw - i;
        let mut x = b.to_vec();
        for k in 0..n {
            x.swap(k, self.pivots[k]);
            let xk = x[k];
            for i in k + 1..=(k + bw).min(n - 1) {
                x[i] -= self.rows[at(i, k)] * xk;
            }
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for j in i + 1..=(i + 2 * bw).min(n - 1) {
                s -= self.rows[at(i, j)] * x[j];
            }
            x[i] = s / self.rows[at(i, i)];
        }
        x
    }
}

/// Hermitian inner product `sum conj(a_i) b_i`.
pub fn dotc(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).fold(Complex64::default(), |acc, (x, y)| acc + x.conj() * y)
}

pub fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(Complex64::norm_sqr).sum::<f64>().sqrt()
}

/// `||a - b|| / ||b||`.
pub fn relative_error(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    (num.sqrt()) / norm2(b)
}
