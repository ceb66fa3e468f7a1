use num_complex::Complex64;

use super::helmholtz::HelmholtzExpander;
use super::laplace::LaplaceExpander;
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::special::{greens_at_distance, radial_derivative, Kernel};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExpansionKind {
    Multipole,
    Local,
}

/// Kernel-specific expansion machinery.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Engine {
    Helmholtz(HelmholtzExpander),
    Laplace(LaplaceExpander),
}

impl Engine {
    pub fn new(kernel: Kernel, order: usize) -> Result<Self> {
        if order == 0 {
            return Err(Error::Domain("expansion order must be at least 1".into()));
        }
        match kernel {
            Kernel::Helmholtz2D { kappa } => {
                Ok(Engine::Helmholtz(HelmholtzExpander { order, kappa }))
            }
            Kernel::Laplace2D => Ok(Engine::Laplace(LaplaceExpander { order })),
            other => Err(Error::Domain(format!(
                "no expansions for {other:?}; use the direct backend"
            ))),
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Engine::Helmholtz(e) => e.len(),
            Engine::Laplace(e) => e.len(),
        }
    }

    pub fn source_basis(&self, rel: Point2, normal: Option<Point2>, out: &mut [Complex64]) {
        match self {
            Engine::Helmholtz(e) => e.source_basis(rel, normal, out),
            Engine::Laplace(e) => e.source_basis(rel, normal, out),
        }
    }

    pub fn target_basis(&self, rel: Point2, out: &mut [Complex64]) {
        match self {
            Engine::Helmholtz(e) => e.target_basis(rel, out),
            Engine::Laplace(e) => e.target_basis(rel, out),
        }
    }

    pub fn multipole_eval_basis(&self, rel: Point2, out: &mut [Complex64]) {
        match self {
            Engine::Helmholtz(e) => e.multipole_eval_basis(rel, out),
            Engine::Laplace(e) => e.multipole_eval_basis(rel, out),
        }
    }

    pub fn m2m(&self, d: Point2) -> Vec<Complex64> {
        match self {
            Engine::Helmholtz(e) => e.m2m(d),
            Engine::Laplace(e) => e.m2m(d),
        }
    }

    pub fn m2l(&self, b: Point2) -> Vec<Complex64> {
        match self {
            Engine::Helmholtz(e) => e.m2l(b),
            Engine::Laplace(e) => e.m2l(b),
        }
    }

    pub fn l2l(&self, d: Point2) -> Vec<Complex64> {
        match self {
            Engine::Helmholtz(e) => e.l2l(d),
            Engine::Laplace(e) => e.l2l(d),
        }
    }

    /// Laplace expansions carry the analytic potential; its real part is the field.
    pub fn analytic(&self) -> bool {
        matches!(self, Engine::Laplace(_))
    }
}

/// Physical far-field value from an expansion evaluation.
#[inline]
pub(crate) fn finish_far(engine: &Engine, value: Complex64) -> Complex64 {
    if engine.analytic() {
        Complex64::new(-value.re / (2.0 * std::f64::consts::PI), 0.0)
    } else {
        value
    }
}

/// Truncated multipole or local expansion about `center`.
///
/// Helmholtz coefficients are indexed `m = -p..=p` (length `2p + 1`); Laplace
/// coefficients `k = 0..=p` (length `p + 1`) describe the analytic potential
/// `sum q log(z - z_i)`, whose real part times `-1/(2 pi)` is the field for
/// real charges.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    pub kind: ExpansionKind,
    pub kernel: Kernel,
    pub order: usize,
    pub center: Point2,
    pub coeffs: Vec<Complex64>,
}

impl Expansion {
    pub fn zeros(
        kind: ExpansionKind,
        kernel: Kernel,
        order: usize,
        center: Point2,
    ) -> Result<Self> {
        let engine = Engine::new(kernel, order)?;
        Ok(Self {
            kind,
            kernel,
            order,
            center,
            coeffs: vec![Complex64::default(); engine.len()],
        })
    }

    /// Coefficient of order `m` (Helmholtz: `-p..=p`, Laplace: `0..=p`).
    pub fn coeff(&self, m: isize) -> Complex64 {
        match self.kernel {
            Kernel::Helmholtz2D { .. } => self.coeffs[(m + self.order as isize) as usize],
            _ => self.coeffs[m as usize],
        }
    }

    fn engine(&self) -> Engine {
        Engine::new(self.kernel, self.order).expect("expansion built from a valid kernel")
    }
}

pub(crate) fn matvec_acc(t: &[Complex64], input: &[Complex64], out: &mut [Complex64]) {
    let n = input.len();
    for (row, o) in t.chunks_exact(n).zip(out.iter_mut()) {
        let mut acc = Complex64::default();
        for (a, b) in row.iter().zip(input) {
            acc += a * b;
        }
        *o += acc;
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter()
        .zip(b)
        .fold(Complex64::default(), |acc, (x, y)| acc + x * y)
}

/// Particle to multipole for point charges (or dipoles with `normals`).
pub fn p2m(
    kernel: Kernel,
    order: usize,
    points: &[Point2],
    normals: Option<&[Point2]>,
    charges: &[Complex64],
    center: Point2,
) -> Result<Expansion> {
    if charges.len() != points.len() {
        return Err(Error::Dimension {
            expected: points.len(),
            got: charges.len(),
        });
    }
    let engine = Engine::new(kernel, order)?;
    let mut out = Expansion::zeros(ExpansionKind::Multipole, kernel, order, center)?;
    let mut basis = vec![Complex64::default(); engine.len()];
    for (i, (&x, &q)) in points.iter().zip(charges).enumerate() {
        engine.source_basis(x - center, normals.map(|n| n[i]), &mut basis);
        for (c, b) in out.coeffs.iter_mut().zip(&basis) {
            *c += q * b;
        }
    }
    Ok(out)
}

/// Recenters a multipole expansion at `parent_center`.
pub fn m2m(child: &Expansion, parent_center: Point2) -> Expansion {
    assert_eq!(
        child.kind,
        ExpansionKind::Multipole,
        "m2m needs a multipole expansion"
    );
    let t = child.engine().m2m(child.center - parent_center);
    let mut coeffs = vec![Complex64::default(); child.coeffs.len()];
    matvec_acc(&t, &child.coeffs, &mut coeffs);
    Expansion {
        center: parent_center,
        coeffs,
        ..child.clone()
    }
}

/// Converts a multipole expansion into a local expansion about `target_center`.
/// The caller guarantees the cells are well separated.
pub fn m2l(source: &Expansion, target_center: Point2) -> Expansion {
    assert_eq!(
        source.kind,
        ExpansionKind::Multipole,
        "m2l needs a multipole expansion"
    );
    let t = source.engine().m2l(target_center - source.center);
    let mut coeffs = vec![Complex64::default(); source.coeffs.len()];
    matvec_acc(&t, &source.coeffs, &mut coeffs);
    Expansion {
        kind: ExpansionKind::Local,
        center: target_center,
        coeffs,
        ..source.clone()
    }
}

/// Recenters a local expansion at `child_center`.
pub fn l2l(parent: &Expansion, child_center: Point2) -> Expansion {
    assert_eq!(
        parent.kind,
        ExpansionKind::Local,
        "l2l needs a local expansion"
    );
    let t = parent.engine().l2l(child_center - parent.center);
    let mut coeffs = vec![Complex64::default(); parent.coeffs.len()];
    matvec_acc(&t, &parent.coeffs, &mut coeffs);
    Expansion {
        center: child_center,
        coeffs,
        ..parent.clone()
    }
}

/// Evaluates a local expansion at `targets` (Laplace: the analytic potential).
pub fn l2p(local: &Expansion, targets: &[Point2]) -> Vec<Complex64> {
    assert_eq!(
        local.kind,
        ExpansionKind::Local,
        "l2p needs a local expansion"
    );
    let engine = local.engine();
    let mut basis = vec![Complex64::default(); engine.len()];
    targets
        .iter()
        .map(|&y| {
            engine.target_basis(y - local.center, &mut basis);
            dot(&basis, &local.coeffs)
        })
        .collect()
}

/// Evaluates a multipole expansion at well-separated `targets`.
pub fn m2p(multipole: &Expansion, targets: &[Point2]) -> Vec<Complex64> {
    assert_eq!(
        multipole.kind,
        ExpansionKind::Multipole,
        "m2p needs a multipole expansion"
    );
    let engine = multipole.engine();
    let mut basis = vec![Complex64::default(); engine.len()];
    targets
        .iter()
        .map(|&y| {
            engine.multipole_eval_basis(y - multipole.center, &mut basis);
            dot(&basis, &multipole.coeffs)
        })
        .collect()
}

/// Kernel value for one source/target pair; zero when the points coincide.
#[inline]
pub(crate) fn direct_kernel(
    kernel: Kernel,
    source: Point2,
    normal: Option<Point2>,
    target: Point2,
) -> Complex64 {
    let d = source - target;
    let r = d.norm();
    if r == 0.0 {
        return Complex64::default();
    }
    match normal {
        None => greens_at_distance(kernel, r),
        Some(n) => radial_derivative(kernel, r) * (d.dot(n) / r),
    }
}

/// Direct near-field accumulation `out[j] += sum_i w_i K(y_j, x_i)`, summed in
/// source order and skipping coincident points.
pub fn p2p(
    kernel: Kernel,
    sources: &[Point2],
    normals: Option<&[Point2]>,
    charges: &[Complex64],
    targets: &[Point2],
    out: &mut [Complex64],
) {
    for (o, &y) in out.iter_mut().zip(targets) {
        let mut acc = Complex64::default();
        for (i, (&x, &q)) in sources.iter().zip(charges).enumerate() {
            acc += q * direct_kernel(kernel, x, normals.map(|n| n[i]), y);
        }
        *o += acc;
    }
}
