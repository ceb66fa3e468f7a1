//! Fast multipole evaluation of `f(y_j) = sum_i w_i K(y_j, x_i)` in 2D.
//!
//! [`FmmOperator`] builds trees, interaction lists and translation operators
//! once for a fixed source/target geometry and then applies the kernel sum to
//! any number of charge vectors. The free functions [`p2m`], [`m2m`], [`m2l`],
//! [`l2l`], [`l2p`] and [`p2p`] expose the individual translation stages.

mod expansion;
mod helmholtz;
mod laplace;
mod operator;

pub use expansion::{l2l, l2p, m2l, m2m, m2p, p2m, p2p, Expansion, ExpansionKind};
pub use operator::FmmOperator;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{Point2, Point3};
use crate::special::{greens, greens_normal_deriv, Kernel};
use crate::tree::{DEFAULT_MAX_LEVEL, DEFAULT_NCRIT};

pub const DEFAULT_ORDER: usize = 6;
pub const DEFAULT_THETA: f64 = 0.4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Backend {
    /// Exact O(NM) summation.
    Direct,
    #[default]
    Fmm,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FmmConfig {
    pub kernel: Kernel,
    pub order: usize,
    pub theta: f64,
    pub ncrit: usize,
    pub max_level: usize,
    pub backend: Backend,
    /// Requested relative precision; when set, `order` follows from it.
    pub epsilon: Option<f64>,
}

impl FmmConfig {
    pub fn new(kernel: Kernel) -> Self {
        Self {
            kernel,
            order: DEFAULT_ORDER,
            theta: DEFAULT_THETA,
            ncrit: DEFAULT_NCRIT,
            max_level: DEFAULT_MAX_LEVEL,
            backend: Backend::Fmm,
            epsilon: None,
        }
    }

    pub fn direct(kernel: Kernel) -> Self {
        Self {
            backend: Backend::Direct,
            ..Self::new(kernel)
        }
    }

    /// Sets `epsilon` and the matching expansion order.
    pub fn with_epsilon(mut self, epsilon: f64) -> Result<Self> {
        self.order = accuracy_to_order(epsilon)?;
        self.epsilon = Some(epsilon);
        Ok(self)
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.order = order;
        self.epsilon = None;
        self
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_ncrit(mut self, ncrit: usize) -> Self {
        self.ncrit = ncrit;
        self
    }

    pub fn with_backend(mut self, backend: Backend) -> Self {
        self.backend = backend;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.theta > 0.0 && self.theta <= 1.0) {
            return Err(Error::Domain(format!(
                "theta must lie in (0, 1], got {}",
                self.theta
            )));
        }
        if self.order == 0 {
            return Err(Error::Domain("expansion order must be at least 1".into()));
        }
        if self.ncrit == 0 {
            return Err(Error::Domain("ncrit must be at least 1".into()));
        }
        if let Some(eps) = self.epsilon {
            if accuracy_to_order(eps)? != self.order {
                return Err(Error::Domain(format!(
                    "order {} does not match epsilon {eps}",
                    self.order
                )));
            }
        }
        if self.backend == Backend::Fmm && self.kernel.dim() != 2 {
            return Err(Error::Domain(format!(
                "{:?} supports only the direct backend",
                self.kernel
            )));
        }
        Ok(())
    }
}

/// Expansion order delivering roughly `epsilon` relative accuracy.
pub fn accuracy_to_order(epsilon: f64) -> Result<usize> {
    if !(1e-12..=0.5).contains(&epsilon) {
        return Err(Error::Domain(format!(
            "epsilon must lie in [1e-12, 0.5], got {epsilon}"
        )));
    }
    // Snap values within roundoff of a power of ten before taking the ceiling.
    let digits = -epsilon.log10();
    let snapped = if (digits - digits.round()).abs() < 1e-9 {
        digits.round()
    } else {
        digits.ceil()
    };
    Ok((snapped as usize).max(1))
}

/// Point-charge sum at `targets`.
pub fn evaluate(
    sources: &[Point2],
    charges: &[Complex64],
    targets: &[Point2],
    config: &FmmConfig,
) -> Result<Vec<Complex64>> {
    FmmOperator::new(sources, None, targets, config)?.apply(charges)
}

/// Dipole sum `sum_i w_i dG/dn_i(x_i, y_j)` at `targets`.
pub fn evaluate_dipole(
    sources: &[Point2],
    normals: &[Point2],
    charges: &[Complex64],
    targets: &[Point2],
    config: &FmmConfig,
) -> Result<Vec<Complex64>> {
    FmmOperator::new(sources, Some(normals), targets, config)?.apply(charges)
}

/// Direct kernel sum for 3D point sets, skipping coincident pairs.
pub fn evaluate_direct_3d(
    kernel: Kernel,
    sources: &[Point3],
    normals: Option<&[Point3]>,
    charges: &[Complex64],
    targets: &[Point3],
) -> Result<Vec<Complex64>> {
    if kernel.dim() != 3 {
        return Err(Error::Domain(format!("{kernel:?} is not a 3D kernel")));
    }
    if charges.len() != sources.len() {
        return Err(Error::Dimension {
            expected: sources.len(),
            got: charges.len(),
        });
    }
    if let Some(n) = normals {
        if n.len() != sources.len() {
            return Err(Error::Dimension {
                expected: sources.len(),
                got: n.len(),
            });
        }
    }
    targets
        .iter()
        .map(|&y| {
            let mut acc = Complex64::default();
            for (i, (&x, &q)) in sources.iter().zip(charges).enumerate() {
                let k = match normals {
                    None => greens(kernel, x, y),
                    Some(n) => greens_normal_deriv(kernel, x, y, n[i]),
                };
                match k {
                    Ok(v) => acc += q * v,
                    Err(Error::Singular) => {}
                    Err(e) => return Err(e),
                }
            }
            Ok(acc)
        })
        .collect()
}

#[cfg(test)]
mod tests;
