use std::collections::HashMap;
use std::sync::OnceLock;

use num_complex::Complex64;

use super::{cell_self_integral, gauss_legendre, BoundaryMesh, QuadratureRule, VolumeSources};
use crate::error::{Error, Result};
use crate::fmm::{FmmConfig, FmmOperator};
use crate::geometry::Point2;
use crate::krylov::{gmres, FnOperator, GmresOptions, Identity};
use crate::special::{greens, self_single_layer_2d};

/// Points per element for off-diagonal layer integrals.
pub const ELEMENT_QUADRATURE_POINTS: usize = 4;

/// Restarted GMRES settings for the boundary flux solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerSolverSettings {
    pub tol: f64,
    pub restart: usize,
    pub max_iters: usize,
}

impl Default for InnerSolverSettings {
    fn default() -> Self {
        Self { tol: 1e-6, restart: 30, max_iters: 200 }
    }
}

impl InnerSolverSettings {
    /// Tolerance `max(epsilon, 1e-6)`.
    pub fn for_epsilon(epsilon: Option<f64>) -> Self {
        let tol = epsilon.map_or(1e-6, |e| e.max(1e-6));
        Self { tol, ..Self::default() }
    }
}

/// Outcome of a boundary flux solve; `flux` holds the last iterate even when
/// the inner solver stopped early.
#[derive(Debug, Clone, PartialEq)]
pub struct FluxSolve {
    pub flux: Vec<Complex64>,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl FluxSolve {
    pub fn into_result(self) -> Result<Vec<Complex64>> {
        if self.converged {
            Ok(self.flux)
        } else {
            Err(Error::InnerSolve { iterations: self.iterations, residual: self.residual })
        }
    }
}

/// Element quadrature points flattened into point sources.
#[derive(Debug, Clone)]
pub(crate) struct LayerQuadrature {
    pub points: Vec<Point2>,
    pub normals: Vec<Point2>,
    /// `|J| w_l` per point.
    pub weights: Vec<f64>,
    pub per_element: usize,
}

impl LayerQuadrature {
    pub fn new(mesh: &BoundaryMesh, rule: &QuadratureRule) -> Self {
        let per_element = rule.len();
        let mut q = Self {
            points: Vec::with_capacity(mesh.len() * per_element),
            normals: Vec::with_capacity(mesh.len() * per_element),
            weights: Vec::with_capacity(mesh.len() * per_element),
            per_element,
        };
        for e in &mesh.elements {
            for (&xi, &w) in rule.nodes.iter().zip(&rule.weights) {
                q.points.push(e.point(xi));
                q.normals.push(e.normal);
                q.weights.push(w * e.jacobian());
            }
        }
        q
    }

    /// Point charges carrying an element-wise constant density.
    pub fn charges(&self, density: &[Complex64]) -> Vec<Complex64> {
        self.weights.iter().enumerate().map(|(k, &w)| density[k / self.per_element] * w).collect()
    }

    pub fn element_points(&self, j: usize) -> std::ops::Range<usize> {
        j * self.per_element..(j + 1) * self.per_element
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// Midpoint collocation of the single and double layer operators, with
/// the flux solve `G q = (I/2 + K) u_b - V`.
#[derive(Debug)]
pub struct BoundarySolver {
    mesh: BoundaryMesh,
    config: FmmConfig,
    settings: InnerSolverSettings,
    quadrature: LayerQuadrature,
    single: FmmOperator,
    /// Exact self integral minus the own-element quadrature contribution.
    single_diagonal: Vec<Complex64>,
    double: OnceLock<FmmOperator>,
}

impl BoundarySolver {
    pub fn new(mesh: BoundaryMesh, config: &FmmConfig, settings: InnerSolverSettings) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::Domain("empty boundary mesh".into()));
        }
        let rule = gauss_legendre(ELEMENT_QUADRATURE_POINTS)?;
        let quadrature = LayerQuadrature::new(&mesh, &rule);
        let midpoints = mesh.midpoints();
        let single = FmmOperator::new(&quadrature.points, None, &midpoints, config)?;
        let mut single_diagonal = Vec::with_capacity(mesh.len());
        for (j, e) in mesh.elements.iter().enumerate() {
            let mut own = Complex64::default();
            for k in quadrature.element_points(j) {
                own += greens(config.kernel, quadrature.points[k], e.midpoint)? * quadrature.weights[k];
            }
            single_diagonal.push(self_single_layer_2d(config.kernel, e.width)? - own);
        }
        Ok(Self { mesh, config: *config, settings, quadrature, single, single_diagonal, double: OnceLock::new() })
    }

    pub fn mesh(&self) -> &BoundaryMesh {
        &self.mesh
    }

    pub fn settings(&self) -> InnerSolverSettings {
        self.settings
    }

    pub fn len(&self) -> usize {
        self.mesh.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mesh.is_empty()
    }

    /// `(G q)` at the collocation nodes.
    pub fn apply_single_layer(&self, q: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.len(), q.len())?;
        let mut out = self.single.apply(&self.quadrature.charges(q))?;
        for ((o, d), qj) in out.iter_mut().zip(&self.single_diagonal).zip(q) {
            *o += d * qj;
        }
        Ok(out)
    }

    /// `(K u)` at the collocation nodes; the diagonal vanishes on flat elements.
    pub fn apply_double_layer(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.len(), u.len())?;
        let double = match self.double.get() {
            Some(op) => op,
            None => {
                let op = FmmOperator::new(
                    &self.quadrature.points,
                    Some(&self.quadrature.normals),
                    &self.mesh.midpoints(),
                    &self.config,
                )?;
                self.double.get_or_init(|| op)
            }
        };
        // Own-element points lie on the element line, so they contribute r.n = 0.
        let out = double.apply(&self.quadrature.charges(u))?;
        Ok(out)
    }

    /// Solves `G q = (I/2 + K) u_b - volume_term` for the flux `q`.
    pub fn solve_flux(&self, dirichlet: Option<&[Complex64]>, volume_term: &[Complex64]) -> Result<FluxSolve> {
        let n = self.len();
        check_len(n, volume_term.len())?;
        let mut rhs: Vec<Complex64> = volume_term.iter().map(|v| -v).collect();
        if let Some(u) = dirichlet {
            let ku = self.apply_double_layer(u)?;
            for ((r, ui), kui) in rhs.iter_mut().zip(u).zip(ku) {
                *r += 0.5 * ui + kui;
            }
        }
        if rhs.iter().all(|v| *v == Complex64::default()) {
            return Ok(FluxSolve { flux: rhs, iterations: 0, residual: 0.0, converged: true });
        }
        let op = FnOperator::new(n, |x: &[Complex64], y: &mut [Complex64]| {
            y.copy_from_slice(&self.apply_single_layer(x).expect("length checked"));
        });
        let opts = GmresOptions {
            tol: self.settings.tol,
            restart: self.settings.restart,
            max_iters: self.settings.max_iters,
            x0: None,
        };
        let report = gmres(&op, &rhs, &Identity(n), &opts)?;
        Ok(FluxSolve {
            iterations: report.iterations,
            residual: report.final_residual(),
            converged: report.converged,
            flux: report.solution,
        })
    }
}

/// Volume potential from fixed source points to fixed targets. Targets that
/// coincide with a source receive the exact integral over that source's
/// square cell instead of the skipped singular term.
#[derive(Debug)]
pub(crate) struct VolumeOperator {
    op: FmmOperator,
    /// `(target, source, coefficient on the source charge)`.
    self_cells: Vec<(usize, usize, Complex64)>,
}

impl VolumeOperator {
    pub fn new(points: &[Point2], weights: &[f64], targets: &[Point2], config: &FmmConfig, self_cells: bool) -> Result<Self> {
        let op = FmmOperator::new(points, None, targets, config)?;
        let mut cells = Vec::new();
        if self_cells {
            let key = |p: &Point2| (p.x.to_bits(), p.y.to_bits());
            let index: HashMap<_, _> = points.iter().enumerate().map(|(j, p)| (key(p), j)).collect();
            let mut coefficient: HashMap<u64, Complex64> = HashMap::new();
            for (i, t) in targets.iter().enumerate() {
                if let Some(&j) = index.get(&key(t)) {
                    let w = weights[j];
                    let c = match coefficient.get(&w.to_bits()) {
                        Some(c) => *c,
                        None => {
                            let c = cell_self_integral(config.kernel, w.sqrt())? / w;
                            coefficient.insert(w.to_bits(), c);
                            c
                        }
                    };
                    cells.push((i, j, c));
                }
            }
        }
        Ok(Self { op, self_cells: cells })
    }

    pub fn apply(&self, charges: &[Complex64]) -> Result<Vec<Complex64>> {
        let mut out = self.op.apply(charges)?;
        for &(i, j, c) in &self.self_cells {
            out[i] += c * charges[j];
        }
        Ok(out)
    }
}

/// Layer and volume potentials at fixed interior targets.
#[derive(Debug)]
pub struct InteriorEvaluator {
    targets: Vec<Point2>,
    config: FmmConfig,
    quadrature: LayerQuadrature,
    single: FmmOperator,
    double: OnceLock<FmmOperator>,
}

impl InteriorEvaluator {
    pub fn new(mesh: &BoundaryMesh, targets: &[Point2], config: &FmmConfig) -> Result<Self> {
        let rule = gauss_legendre(ELEMENT_QUADRATURE_POINTS)?;
        let quadrature = LayerQuadrature::new(mesh, &rule);
        let single = FmmOperator::new(&quadrature.points, None, targets, config)?;
        Ok(Self { targets: targets.to_vec(), config: *config, quadrature, single, double: OnceLock::new() })
    }

    pub fn num_targets(&self) -> usize {
        self.targets.len()
    }

    pub fn single_layer(&self, q: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.quadrature.points.len() / self.quadrature.per_element, q.len())?;
        self.single.apply(&self.quadrature.charges(q))
    }

    pub fn double_layer(&self, u: &[Complex64]) -> Result<Vec<Complex64>> {
        check_len(self.quadrature.points.len() / self.quadrature.per_element, u.len())?;
        let double = match self.double.get() {
            Some(op) => op,
            None => {
                let op = FmmOperator::new(&self.quadrature.points, Some(&self.quadrature.normals), &self.targets, &self.config)?;
                self.double.get_or_init(|| op)
            }
        };
        double.apply(&self.quadrature.charges(u))
    }
}

/// `V` at the collocation nodes.
pub fn volume_to_boundary(sources: &VolumeSources, mesh: &BoundaryMesh, config: &FmmConfig) -> Result<Vec<Complex64>> {
    FmmOperator::new(&sources.points, None, &mesh.midpoints(), config)?.apply(&sources.charges())
}

/// One-shot flux solve; see [`BoundarySolver::solve_flux`].
pub fn solve_boundary_flux(
    mesh: &BoundaryMesh,
    dirichlet: &[Complex64],
    volume_term: &[Complex64],
    config: &FmmConfig,
    settings: InnerSolverSettings,
) -> Result<FluxSolve> {
    check_len(mesh.len(), dirichlet.len())?;
    let solver = BoundarySolver::new(mesh.clone(), config, settings)?;
    let nonzero = dirichlet.iter().any(|v| *v != Complex64::default());
    solver.solve_flux(nonzero.then_some(dirichlet), volume_term)
}

/// `u = G q - K u_b + V` at `targets`. Targets coinciding with a volume
/// point pick up that point's square cell integral.
pub fn evaluate_interior(
    mesh: &BoundaryMesh,
    flux: &[Complex64],
    dirichlet: &[Complex64],
    sources: &VolumeSources,
    targets: &[Point2],
    config: &FmmConfig,
) -> Result<Vec<Complex64>> {
    check_len(mesh.len(), flux.len())?;
    check_len(mesh.len(), dirichlet.len())?;
    let eval = InteriorEvaluator::new(mesh, targets, config)?;
    let mut u = eval.single_layer(flux)?;
    if dirichlet.iter().any(|v| *v != Complex64::default()) {
        for (ui, k) in u.iter_mut().zip(eval.double_layer(dirichlet)?) {
            *ui -= k;
        }
    }
    if !sources.is_empty() {
        let vol = VolumeOperator::new(&sources.points, &sources.weights, targets, config, true)?;
        for (ui, v) in u.iter_mut().zip(vol.apply(&sources.charges())?) {
            *ui += v;
        }
    }
    Ok(u)
}
