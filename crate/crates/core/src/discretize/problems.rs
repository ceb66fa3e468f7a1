use std::f64::consts::PI;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProblemId {
    /// Manufactured `sin(pi x) sin(2 pi y)` on the unit square.
    P1,
    /// Gaussian source near the top edge of `[-1, 1]^2`, zero boundary data.
    P2,
    /// Unit source, zero boundary data on the unit square.
    P3,
    /// `x^2 sin(mu x) cos(mu y)` with inhomogeneous boundary data, `kappa = mu sqrt 2`.
    P4,
}

impl ProblemId {
    pub const ALL: [ProblemId; 4] = [ProblemId::P1, ProblemId::P2, ProblemId::P3, ProblemId::P4];

    pub fn name(self) -> &'static str {
        match self {
            ProblemId::P1 => "P1",
            ProblemId::P2 => "P2",
            ProblemId::P3 => "P3",
            ProblemId::P4 => "P4",
        }
    }
}

impl std::str::FromStr for ProblemId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "P1" => Ok(ProblemId::P1),
            "P2" => Ok(ProblemId::P2),
            "P3" => Ok(ProblemId::P3),
            "P4" => Ok(ProblemId::P4),
            other => Err(Error::Domain(format!("unknown problem {other}"))),
        }
    }
}

/// `laplace(u) + kappa^2 u = f` in the square `[lo, hi]^2`, `u = g` on its boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProblemSpec {
    pub id: ProblemId,
    pub lo: f64,
    pub hi: f64,
    pub kappa: f64,
    /// Only for P4.
    pub mu: Option<f64>,
}

impl ProblemSpec {
    pub fn new(id: ProblemId, kappa: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !kappa.is_finite() {
            return Err(Error::Domain(format!("kappa must be finite and non-negative, got {kappa}")));
        }
        let (lo, hi) = match id {
            ProblemId::P2 => (-1.0, 1.0),
            _ => (0.0, 1.0),
        };
        let mu = (id == ProblemId::P4).then(|| kappa / std::f64::consts::SQRT_2);
        Ok(Self { id, lo, hi, kappa, mu })
    }

    /// P4 parameterized by `mu`.
    pub fn p4(mu: f64) -> Result<Self> {
        let mut spec = Self::new(ProblemId::P4, mu.abs() * std::f64::consts::SQRT_2)?;
        spec.mu = Some(mu);
        Ok(spec)
    }

    pub fn source(&self, x: f64, y: f64) -> f64 {
        match self.id {
            ProblemId::P1 => (self.kappa * self.kappa - 5.0 * PI * PI) * (PI * x).sin() * (2.0 * PI * y).sin(),
            ProblemId::P2 => (-10.0 * ((y - 1.0).powi(2) + (x - 0.5).powi(2))).exp(),
            ProblemId::P3 => 1.0,
            ProblemId::P4 => {
                let mu = self.mu();
                2.0 * (mu * x).sin() * (mu * y).cos() + 4.0 * mu * x * (mu * x).cos() * (mu * y).cos()
            }
        }
    }

    pub fn dirichlet(&self, x: f64, y: f64) -> f64 {
        match self.id {
            ProblemId::P4 => self.exact(x, y).expect("P4 has an exact solution"),
            _ => 0.0,
        }
    }

    pub fn exact(&self, x: f64, y: f64) -> Option<f64> {
        match self.id {
            ProblemId::P1 => Some((PI * x).sin() * (2.0 * PI * y).sin()),
            ProblemId::P4 => {
                let mu = self.mu();
                Some(x * x * (mu * x).sin() * (mu * y).cos())
            }
            _ => None,
        }
    }

    pub fn has_exact(&self) -> bool {
        matches!(self.id, ProblemId::P1 | ProblemId::P4)
    }

    fn mu(&self) -> f64 {
        self.mu.unwrap_or(self.kappa / std::f64::consts::SQRT_2)
    }
}

/// The four problems with their reference parameters.
pub fn builtin_problems() -> Vec<ProblemSpec> {
    vec![
        ProblemSpec::new(ProblemId::P1, 15.0).expect("valid"),
        ProblemSpec::new(ProblemId::P2, 5.0).expect("valid"),
        ProblemSpec::new(ProblemId::P3, 0.0).expect("valid"),
        ProblemSpec::p4(1.0).expect("valid"),
    ]
}
