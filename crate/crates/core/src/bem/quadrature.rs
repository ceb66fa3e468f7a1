use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::{hankel1, Kernel};

/// Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `int_a^b f` with the rule mapped onto `[a, b]`.
    pub fn integrate<T>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T
    where
        T: std::ops::Add<Output = T> + std::ops::Mul<f64, Output = T> + Default,
    {
        let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
        let mut sum = T::default();
        for (&x, &w) in self.nodes.iter().zip(&self.weights) {
            sum = sum + f(mid + half * x) * (w * half);
        }
        sum
    }
}

/// `n`-point Gauss–Legendre nodes (ascending) and weights, by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if n == 0 || n > 256 {
        return Err(Error::Domain(format!("Gauss-Legendre order must lie in 1..=256, got {n}")));
    }
    if n == 1 {
        return Ok(QuadratureRule { nodes: vec![0.0], weights: vec![2.0] });
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// `int G(|y|) dy` over the square of side `side` centred on the
/// singularity.
pub fn cell_self_integral(kernel: Kernel, side: f64) -> Result<Complex64> {
    if !(side > 0.0) || !side.is_finite() {
        return Err(Error::Domain(format!("cell side must be positive, got {side}")));
    }
    // int_0^R G(r) r dr in closed form.
    let radial = |r: f64| -> Result<Complex64> {
        match kernel {
            Kernel::Laplace2D => Ok(Complex64::new(-(r * r * r.ln() / 2.0 - r * r / 4.0) / (2.0 * PI), 0.0)),
            Kernel::Helmholtz2D { kappa } => {
                let h1 = hankel1(1, kappa * r)?;
                let i = Complex64::new(0.0, 1.0);
                Ok(0.25 * i * (r * h1 / kappa + 2.0 * i / (PI * kappa * kappa)))
            }
            other => Err(Error::Domain(format!("{other:?} is not a 2D kernel"))),
        }
    };
    // Eight congruent triangles, each swept by theta in [0, pi/4].
    let rule = gauss_legendre(24)?;
    let mut sum = Complex64::default();
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        let theta = FRAC_PI_4 * 0.5 * (x + 1.0);
        sum += radial(0.5 * side / theta.cos())? * (w * FRAC_PI_4 * 0.5);
    }
    Ok(8.0 * sum)
}
