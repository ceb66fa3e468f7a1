use std::collections::HashMap;

use num_complex::Complex64;
use rayon::prelude::*;

use super::expansion::{direct_kernel, finish_far, matvec_acc, Engine};
use super::{Backend, FmmConfig};
use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::special::Kernel;
use crate::tree::{dual_traversal_limited, Tree};

/// Near-field kernel entries kept in memory per operator.
const NEAR_CACHE_ENTRIES: usize = 8_000_000;
/// Dense direct matrices are cached up to this many entries.
const DIRECT_CACHE_ENTRIES: usize = 4_000_000;
/// Far pairs need `kappa (R_s + R_t) <= LOW_FREQUENCY_LIMIT * p` so the
/// truncated Graf series stays accurate.
const LOW_FREQUENCY_LIMIT: f64 = 1.0;

/// Kernel sum `u(y_j) = sum_i w_i K(y_j, x_i)` for fixed sources, optional
/// source normals (dipole kernel) and targets. Coincident pairs are skipped.
#[derive(Debug, Clone)]
pub struct FmmOperator {
    kernel: Kernel,
    num_sources: usize,
    num_targets: usize,
    plan: Plan,
}

#[derive(Debug, Clone)]
enum Plan {
    Dense(Vec<Complex64>),
    Direct {
        sources: Vec<Point2>,
        normals: Option<Vec<Point2>>,
        targets: Vec<Point2>,
    },
    Fmm(Box<FmmPlan>),
}

#[derive(Debug, Clone)]
struct FmmPlan {
    engine: Engine,
    source_tree: Tree,
    target_tree: Tree,
    /// Source positions and normals in source-tree order.
    sources: Vec<Point2>,
    normals: Option<Vec<Point2>>,
    targets: Vec<Point2>,
    /// Per source body P2M weights, `len` each, tree order.
    p2m: Vec<Complex64>,
    /// Per target body L2P weights, `len` each, tree order.
    l2p: Vec<Complex64>,
    /// Source cell -> M2M matrix index into `ops` (root has none).
    m2m: Vec<Option<usize>>,
    /// Target cell -> L2L matrix index.
    l2l: Vec<Option<usize>>,
    /// Per target cell, `(source cell, matrix index)` far interactions.
    m2l: Vec<Vec<(usize, usize)>>,
    ops: Vec<Vec<Complex64>>,
    near: Vec<NearGroup>,
    /// Whether any far interaction exists.
    has_far: bool,
}

#[derive(Debug, Clone)]
struct NearGroup {
    target_leaf: usize,
    sources: Vec<usize>,
    /// Concatenated `nt x ns` row-major blocks, one per source leaf.
    blocks: Option<Vec<Complex64>>,
}

#[derive(Default)]
struct OpCache {
    index: HashMap<(u8, u64, u64), usize>,
    ops: Vec<Vec<Complex64>>,
}

impl OpCache {
    fn get(&mut self, tag: u8, v: Point2, build: impl FnOnce() -> Vec<Complex64>) -> usize {
        let key = (tag, v.x.to_bits(), v.y.to_bits());
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        self.ops.push(build());
        let i = self.ops.len() - 1;
        self.index.insert(key, i);
        i
    }
}

impl FmmOperator {
    pub fn new(
        sources: &[Point2],
        normals: Option<&[Point2]>,
        targets: &[Point2],
        config: &FmmConfig,
    ) -> Result<Self> {
        config.validate()?;
        if config.kernel.dim() != 2 {
            return Err(Error::Domain(format!(
                "{:?} is not a 2D kernel",
                config.kernel
            )));
        }
        if let Some(n) = normals {
            if n.len() != sources.len() {
                return Err(Error::Dimension {
                    expected: sources.len(),
                    got: n.len(),
                });
            }
        }
        if let Some(bad) = sources.iter().chain(targets).find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite point {bad:?}")));
        }
        let kernel = config.kernel;
        let plan = if sources.is_empty() || targets.is_empty() {
            Plan::Dense(Vec::new())
        } else if config.backend == Backend::Direct {
            if sources.len() * targets.len() <= DIRECT_CACHE_ENTRIES {
                Plan::Dense(dense_matrix(kernel, sources, normals, targets))
            } else {
                Plan::Direct {
                    sources: sources.to_vec(),
                    normals: normals.map(<[Point2]>::to_vec),
                    targets: targets.to_vec(),
                }
            }
        } else {
            Plan::Fmm(Box::new(FmmPlan::build(sources, normals, targets, config)?))
        };
        Ok(Self {
            kernel,
            num_sources: sources.len(),
            num_targets: targets.len(),
            plan,
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn num_sources(&self) -> usize {
        self.num_sources
    }

    pub fn num_targets(&self) -> usize {
        self.num_targets
    }

    /// Number of far (multipole-to-local) interactions; zero for direct plans.
    pub fn num_far_pairs(&self) -> usize {
        match &self.plan {
            Plan::Fmm(p) => p.m2l.iter().map(Vec::len).sum(),
            _ => 0,
        }
    }

    pub fn apply(&self, charges: &[Complex64]) -> Result<Vec<Complex64>> {
        if charges.len() != self.num_sources {
            return Err(Error::Dimension {
                expected: self.num_sources,
                got: charges.len(),
            });
        }
        let mut out = vec![Complex64::default(); self.num_targets];
        match &self.plan {
            Plan::Dense(m) => {
                if !m.is_empty() {
                    out.par_iter_mut()
                        .zip(m.par_chunks_exact(self.num_sources))
                        .for_each(|(o, row)| {
                            *o = row
                                .iter()
                                .zip(charges)
                                .fold(Complex64::default(), |acc, (a, q)| acc + a * q);
                        });
                }
            }
            Plan::Direct {
                sources,
                normals,
                targets,
            } => {
                out.par_iter_mut()
                    .zip(targets.par_iter())
                    .for_each(|(o, &y)| {
                        let mut acc = Complex64::default();
                        for (i, (&x, &q)) in sources.iter().zip(charges).enumerate() {
                            acc += q * direct_kernel(
                                self.kernel,
                                x,
                                normals.as_ref().map(|n| n[i]),
                                y,
                            );
                        }
                        *o = acc;
                    });
            }
            Plan::Fmm(plan) => out = plan.apply(charges),
        }
        Ok(out)
    }
}

fn dense_matrix(
    kernel: Kernel,
    sources: &[Point2],
    normals: Option<&[Point2]>,
    targets: &[Point2],
) -> Vec<Complex64> {
    let n = sources.len();
    let mut m = vec![Complex64::default(); n * targets.len()];
    m.par_chunks_exact_mut(n)
        .zip(targets.par_iter())
        .for_each(|(row, &y)| {
            for (i, (e, &x)) in row.iter_mut().zip(sources).enumerate() {
                *e = direct_kernel(kernel, x, normals.map(|nn| nn[i]), y);
            }
        });
    m
}

impl FmmPlan {
    fn build(
        sources: &[Point2],
        normals: Option<&[Point2]>,
        targets: &[Point2],
        config: &FmmConfig,
    ) -> Result<Self> {
        let engine = Engine::new(config.kernel, config.order)?;
        let len = engine.len();
        let source_tree = Tree::from_points(sources, config.ncrit, config.max_level)?;
        let target_tree = Tree::from_points(targets, config.ncrit, config.max_level)?;
        let kappa = config.kernel.kappa();
        let max_pair_radius = if kappa > 0.0 {
            LOW_FREQUENCY_LIMIT * config.order as f64 / kappa
        } else {
            f64::INFINITY
        };
        let lists =
            dual_traversal_limited(&source_tree, &target_tree, config.theta, max_pair_radius);

        let sorted_sources: Vec<Point2> = source_tree.bodies.iter().map(|b| b.position).collect();
        let sorted_normals = normals.map(|n| source_tree.to_tree_order(n));
        let sorted_targets: Vec<Point2> = target_tree.bodies.iter().map(|b| b.position).collect();

        let has_far = !lists.far.is_empty();
        let mut cache = OpCache::default();
        let mut m2l = vec![Vec::new(); target_tree.cells.len()];
        let (mut p2m, mut l2p) = (Vec::new(), Vec::new());
        let (mut m2m_idx, mut l2l_idx) = (Vec::new(), Vec::new());
        if has_far {
            p2m = vec![Complex64::default(); sorted_sources.len() * len];
            for leaf in source_tree.leaves() {
                let cell = &source_tree.cells[leaf];
                for k in cell.bodies.clone() {
                    let normal = sorted_normals.as_ref().map(|n| n[k]);
                    engine.source_basis(
                        sorted_sources[k] - cell.center,
                        normal,
                        &mut p2m[k * len..(k + 1) * len],
                    );
                }
            }
            l2p = vec![Complex64::default(); sorted_targets.len() * len];
            for leaf in target_tree.leaves() {
                let cell = &target_tree.cells[leaf];
                for k in cell.bodies.clone() {
                    engine.target_basis(
                        sorted_targets[k] - cell.center,
                        &mut l2p[k * len..(k + 1) * len],
                    );
                }
            }
            m2m_idx = source_tree
                .cells
                .iter()
                .map(|c| {
                    c.parent.map(|p| {
                        let d = c.center - source_tree.cells[p].center;
                        cache.get(0, d, || engine.m2m(d))
                    })
                })
                .collect();
            l2l_idx = target_tree
                .cells
                .iter()
                .map(|c| {
                    c.parent.map(|p| {
                        let d = c.center - target_tree.cells[p].center;
                        cache.get(2, d, || engine.l2l(d))
                    })
                })
                .collect();
            for &(s, t) in &lists.far {
                let b = target_tree.cells[t].center - source_tree.cells[s].center;
                let op = cache.get(1, b, || engine.m2l(b));
                m2l[t].push((s, op));
            }
        }

        let mut by_target: Vec<Vec<usize>> = vec![Vec::new(); target_tree.cells.len()];
        for &(s, t) in &lists.near {
            by_target[t].push(s);
        }
        let mut budget = NEAR_CACHE_ENTRIES;
        let mut near: Vec<NearGroup> = by_target
            .into_iter()
            .enumerate()
            .filter(|(_, s)| !s.is_empty())
            .map(|(target_leaf, mut sources)| {
                sources.sort_unstable();
                let nt = target_tree.cells[target_leaf].len();
                let entries: usize = sources
                    .iter()
                    .map(|&s| nt * source_tree.cells[s].len())
                    .sum();
                let cached = entries <= budget;
                if cached {
                    budget -= entries;
                }
                NearGroup {
                    target_leaf,
                    sources,
                    blocks: cached.then(Vec::new),
                }
            })
            .collect();
        let kernel = config.kernel;
        near.par_iter_mut().for_each(|g| {
            if let Some(blocks) = g.blocks.as_mut() {
                let tcell = &target_tree.cells[g.target_leaf];
                for &s in &g.sources {
                    let scell = &source_tree.cells[s];
                    for j in tcell.bodies.clone() {
                        for i in scell.bodies.clone() {
                            let normal = sorted_normals.as_ref().map(|n| n[i]);
                            blocks.push(direct_kernel(
                                kernel,
                                sorted_sources[i],
                                normal,
                                sorted_targets[j],
                            ));
                        }
                    }
                }
            }
        });

        Ok(Self {
            engine,
            source_tree,
            target_tree,
            sources: sorted_sources,
            normals: sorted_normals,
            targets: sorted_targets,
            p2m,
            l2p,
            m2m: m2m_idx,
            l2l: l2l_idx,
            m2l,
            ops: cache.ops,
            near,
            has_far,
        })
    }

    fn apply(&self, charges: &[Complex64]) -> Vec<Complex64> {
        let q = self.source_tree.to_tree_order(charges);
        let mut u = vec![Complex64::default(); self.targets.len()];
        if self.has_far {
            if self.engine.analytic() {
                // The analytic potential mixes real and imaginary strengths,
                // so each part gets its own pass.
                let re: Vec<Complex64> = q.iter().map(|c| Complex64::new(c.re, 0.0)).collect();
                let im: Vec<Complex64> = q.iter().map(|c| Complex64::new(c.im, 0.0)).collect();
                let far_re = self.far_field(&re);
                let far_im = self.far_field(&im);
                for (o, (a, b)) in u.iter_mut().zip(far_re.iter().zip(&far_im)) {
                    *o = Complex64::new(a.re, b.re);
                }
            } else {
                u = self.far_field(&q);
            }
        }
        self.near_field(&q, &mut u);
        self.target_tree.to_input_order(&u)
    }

    /// Far-field potentials in target-tree order.
    fn far_field(&self, q: &[Complex64]) -> Vec<Complex64> {
        let len = self.engine.len();
        let scells = &self.source_tree.cells;
        let tcells = &self.target_tree.cells;

        let mut multipole = vec![Complex64::default(); scells.len() * len];
        multipole
            .par_chunks_exact_mut(len)
            .zip(scells.par_iter())
            .for_each(|(m, cell)| {
                if cell.is_leaf() {
                    for k in cell.bodies.clone() {
                        let w = q[k];
                        for (a, b) in m.iter_mut().zip(&self.p2m[k * len..(k + 1) * len]) {
                            *a += w * b;
                        }
                    }
                }
            });
        // Children follow their parents in level order.
        for c in (1..scells.len()).rev() {
            if let (Some(p), Some(op)) = (scells[c].parent, self.m2m[c]) {
                let (head, tail) = multipole.split_at_mut(c * len);
                matvec_acc(
                    &self.ops[op],
                    &tail[..len],
                    &mut head[p * len..(p + 1) * len],
                );
            }
        }

        let mut local = vec![Complex64::default(); tcells.len() * len];
        local
            .par_chunks_exact_mut(len)
            .zip(self.m2l.par_iter())
            .for_each(|(l, pairs)| {
                for &(s, op) in pairs {
                    matvec_acc(&self.ops[op], &multipole[s * len..(s + 1) * len], l);
                }
            });
        for c in 1..tcells.len() {
            if let (Some(p), Some(op)) = (tcells[c].parent, self.l2l[c]) {
                let (head, tail) = local.split_at_mut(c * len);
                matvec_acc(
                    &self.ops[op],
                    &head[p * len..(p + 1) * len],
                    &mut tail[..len],
                );
            }
        }

        let mut u = vec![Complex64::default(); self.targets.len()];
        for leaf in self.target_tree.leaves() {
            let l = &local[leaf * len..(leaf + 1) * len];
            for k in tcells[leaf].bodies.clone() {
                let basis = &self.l2p[k * len..(k + 1) * len];
                let v = basis
                    .iter()
                    .zip(l)
                    .fold(Complex64::default(), |acc, (a, b)| acc + a * b);
                u[k] = finish_far(&self.engine, v);
            }
        }
        u
    }

    fn near_field(&self, q: &[Complex64], u: &mut [Complex64]) {
        let scells = &self.source_tree.cells;
        let tcells = &self.target_tree.cells;
        let kernel = match self.engine {
            Engine::Helmholtz(e) => Kernel::Helmholtz2D { kappa: e.kappa },
            Engine::Laplace(_) => Kernel::Laplace2D,
        };
        let contributions: Vec<Vec<Complex64>> = self
            .near
            .par_iter()
            .map(|g| {
                let tcell = &tcells[g.target_leaf];
                let mut acc = vec![Complex64::default(); tcell.len()];
                match &g.blocks {
                    Some(blocks) => {
                        let mut offset = 0;
                        for &s in &g.sources {
                            let range = scells[s].bodies.clone();
                            let ns = range.len();
                            let qs = &q[range];
                            for a in acc.iter_mut() {
                                let row = &blocks[offset..offset + ns];
                                *a += row
                                    .iter()
                                    .zip(qs)
                                    .fold(Complex64::default(), |t, (k, w)| t + k * w);
                                offset += ns;
                            }
                        }
                    }
                    None => {
                        for &s in &g.sources {
                            for (a, j) in acc.iter_mut().zip(tcell.bodies.clone()) {
                                let y = self.targets[j];
                                let mut t = Complex64::default();
                                for i in scells[s].bodies.clone() {
                                    let normal = self.normals.as_ref().map(|n| n[i]);
                                    t += q[i] * direct_kernel(kernel, self.sources[i], normal, y);
                                }
                                *a += t;
                            }
                        }
                    }
                }
                acc
            })
            .collect();
        for (g, acc) in self.near.iter().zip(contributions) {
            for (o, a) in u[tcells[g.target_leaf].bodies.clone()].iter_mut().zip(acc) {
                *o += a;
            }
        }
    }
}
