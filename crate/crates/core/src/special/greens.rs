//! Free-space Green's kernels for the Laplace and Helmholtz operators.
//!
//! The normal derivative is taken at the source point along the normal that
//! lives there, with `r_n = (source - target) . n / r`.

use std::f64::consts::{FRAC_1_PI, PI};

use num_complex::Complex64;

use super::bessel::{hankel1_0_unchecked, hankel1_1_unchecked};
use crate::error::{Error, Result};
use crate::geometry::SpacePoint;

/// Exponential of Euler's constant, as used in the diagonal element integral.
pub const EXP_EULER_GAMMA: f64 = 1.781_072_418;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Which fundamental solution to evaluate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Laplace2D,
    Helmholtz2D { kappa: f64 },
    Laplace3D,
    Helmholtz3D { kappa: f64 },
}

impl Kernel {
    pub fn helmholtz_2d(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Kernel::Helmholtz2D { kappa })
    }

    pub fn helmholtz_3d(kappa: f64) -> Result<Self> {
        check_kappa(kappa)?;
        Ok(Kernel::Helmholtz3D { kappa })
    }

    /// 2D kernel for wavenumber `kappa`; `kappa == 0` selects the Laplace kernel.
    pub fn for_wavenumber_2d(kappa: f64) -> Result<Self> {
        if kappa == 0.0 {
            Ok(Kernel::Laplace2D)
        } else {
            Self::helmholtz_2d(kappa)
        }
    }

    pub fn kappa(self) -> f64 {
        match self {
            Kernel::Helmholtz2D { kappa } | Kernel::Helmholtz3D { kappa } => kappa,
            Kernel::Laplace2D | Kernel::Laplace3D => 0.0,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Kernel::Laplace2D | Kernel::Helmholtz2D { .. } => 2,
            Kernel::Laplace3D | Kernel::Helmholtz3D { .. } => 3,
        }
    }
}

fn check_kappa(kappa: f64) -> Result<()> {
    if kappa.is_finite() && kappa > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "Helmholtz kernels need kappa > 0, got {kappa}"
        )))
    }
}

fn check_dim<P: SpacePoint>(kernel: Kernel) -> Result<()> {
    if kernel.dim() == P::DIM {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{kernel:?} evaluated on {}-dimensional points",
            P::DIM
        )))
    }
}

/// `G(source, target)`.
pub fn greens<P: SpacePoint>(kernel: Kernel, source: P, target: P) -> Result<Complex64> {
    check_dim::<P>(kernel)?;
    let r = source.separation(target);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    Ok(greens_at_distance(kernel, r))
}

/// Kernel value as a function of distance only; `r > 0`.
#[inline]
pub(crate) fn greens_at_distance(kernel: Kernel, r: f64) -> Complex64 {
    match kernel {
        Kernel::Helmholtz2D { kappa } => 0.25 * I * hankel1_0_unchecked(kappa * r),
        Kernel::Laplace2D => Complex64::new(-0.5 * FRAC_1_PI * r.ln(), 0.0),
        Kernel::Helmholtz3D { kappa } => Complex64::from_polar(1.0 / (4.0 * PI * r), kappa * r),
        Kernel::Laplace3D => Complex64::new(1.0 / (4.0 * PI * r), 0.0),
    }
}

/// `dG/dn` at the source, along the unit `normal` attached to the source.
pub fn greens_normal_deriv<P: SpacePoint>(
    kernel: Kernel,
    source: P,
    target: P,
    normal: P,
) -> Result<Complex64> {
    check_dim::<P>(kernel)?;
    let r = source.separation(target);
    if r == 0.0 {
        return Err(Error::Singular);
    }
    let r_n = source.projected(target, normal) / r;
    Ok(radial_derivative(kernel, r) * r_n)
}

/// `dG/dr` such that `dG/dn = dG/dr * r_n`; `r > 0`.
#[inline]
pub(crate) fn radial_derivative(kernel: Kernel, r: f64) -> Complex64 {
    match kernel {
        Kernel::Helmholtz2D { kappa } => -0.25 * kappa * I * hankel1_1_unchecked(kappa * r),
        Kernel::Laplace2D => Complex64::new(-0.5 * FRAC_1_PI / r, 0.0),
        Kernel::Helmholtz3D { kappa } => {
            Complex64::new(-1.0, kappa * r) / (4.0 * PI * r * r)
                * Complex64::from_polar(1.0, kappa * r)
        }
        Kernel::Laplace3D => Complex64::new(-1.0 / (4.0 * PI * r * r), 0.0),
    }
}

/// `int H^1_0(kappa r) dGamma` over a flat element of width `w` about its own
/// midpoint: `w + i (2/pi) w [ln(gamma kappa w / 4) - 1]`. Multiply by `i/4`
/// for the diagonal single-layer entry. Accurate for small `kappa * w`.
pub fn singular_diagonal_2d(kappa: f64, width: f64) -> Result<Complex64> {
    if !(width > 0.0) || !width.is_finite() {
        return Err(Error::Domain(format!(
            "element width must be positive, got {width}"
        )));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::Domain(format!(
            "kappa must be positive, got {kappa}"
        )));
    }
    let log_term = (EXP_EULER_GAMMA * kappa * width / 4.0).ln() - 1.0;
    Ok(Complex64::new(width, 2.0 * FRAC_1_PI * width * log_term))
}

/// Diagonal single-layer entry `int G dGamma` of a flat element about its own
/// midpoint, for either 2D kernel.
pub fn self_single_layer_2d(kernel: Kernel, width: f64) -> Result<Complex64> {
    match kernel {
        Kernel::Helmholtz2D { kappa } => Ok(0.25 * I * singular_diagonal_2d(kappa, width)?),
        Kernel::Laplace2D => {
            if !(width > 0.0) {
                return Err(Error::Domain(format!(
                    "element width must be positive, got {width}"
                )));
            }
            // -(1/2pi) int_{-w/2}^{w/2} ln|s| ds
            Ok(Complex64::new(
                -0.5 * FRAC_1_PI * width * ((0.5 * width).ln() - 1.0),
                0.0,
            ))
        }
        other => Err(Error::Domain(format!("{other:?} is not a 2D kernel"))),
    }
}
