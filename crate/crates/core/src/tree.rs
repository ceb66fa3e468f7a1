//! Quadtree decomposition of planar point sets and the dual-tree traversal
//! that splits all source/target cell pairs into far (expansion) and near
//! (direct) interactions.

use std::f64::consts::SQRT_2;
use std::ops::Range;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::Point2;

pub const DEFAULT_NCRIT: usize = 64;
pub const DEFAULT_MAX_LEVEL: usize = 24;

const ROOT_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Body {
    pub position: Point2,
    pub charge: Complex64,
    /// Position of this body in the caller's input order.
    pub index: usize,
}

/// A square cell. Children are stored contiguously at
/// `first_child..first_child + num_children`. Expansions live in the FMM's
/// per-cell arrays, indexed like `Tree::cells`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub center: Point2,
    pub half_width: f64,
    pub level: usize,
    pub bodies: Range<usize>,
    pub first_child: usize,
    pub num_children: usize,
    pub parent: Option<usize>,
}

impl Cell {
    pub fn is_leaf(&self) -> bool {
        self.num_children == 0
    }

    pub fn children(&self) -> Range<usize> {
        self.first_child..self.first_child + self.num_children
    }

    /// Radius of the circumscribed circle.
    pub fn radius(&self) -> f64 {
        self.half_width * SQRT_2
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    fn contains(&self, p: Point2) -> bool {
        let lo_x = self.center.x - self.half_width;
        let lo_y = self.center.y - self.half_width;
        p.x >= lo_x
            && p.x <= self.center.x + self.half_width
            && p.y >= lo_y
            && p.y <= self.center.y + self.half_width
    }
}

/// Cells in level (breadth-first) order over a permuted body array.
#[derive(Debug, Clone, PartialEq)]
pub struct Tree {
    pub cells: Vec<Cell>,
    pub bodies: Vec<Body>,
    /// `permutation[i]` is the input index of `bodies[i]`.
    pub permutation: Vec<usize>,
    pub ncrit: usize,
    pub max_level: usize,
}

impl Tree {
    /// Builds the quadtree. Cells holding more than `ncrit` bodies are split
    /// until `max_level`; exceeding `ncrit` at `max_level` is reported as
    /// [`Error::Degenerate`].
    pub fn build(
        points: &[Point2],
        charges: &[Complex64],
        ncrit: usize,
        max_level: usize,
    ) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Domain("tree needs at least one point".into()));
        }
        if charges.len() != points.len() {
            return Err(Error::Dimension {
                expected: points.len(),
                got: charges.len(),
            });
        }
        if ncrit == 0 {
            return Err(Error::Domain("ncrit must be at least 1".into()));
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate {p:?}")));
        }

        let (center, half_width) = bounding_square(points);
        let mut bodies: Vec<Body> = points
            .iter()
            .zip(charges)
            .enumerate()
            .map(|(index, (&position, &charge))| Body {
                position,
                charge,
                index,
            })
            .collect();
        let mut cells = vec![Cell {
            center,
            half_width,
            level: 0,
            bodies: 0..points.len(),
            first_child: 0,
            num_children: 0,
            parent: None,
        }];

        let mut scratch: Vec<Body> = Vec::with_capacity(points.len());
        let mut i = 0;
        while i < cells.len() {
            let cell = cells[i].clone();
            if cell.len() <= ncrit {
                i += 1;
                continue;
            }
            if cell.level >= max_level {
                return Err(Error::Degenerate {
                    count: cell.len(),
                    max_level,
                });
            }
            let slice = &mut bodies[cell.bodies.clone()];
            let mut counts = [0usize; 4];
            for b in slice.iter() {
                counts[quadrant(cell.center, b.position)] += 1;
            }
            let mut offsets = [0usize; 4];
            for q in 1..4 {
                offsets[q] = offsets[q - 1] + counts[q - 1];
            }
            scratch.clear();
            scratch.extend_from_slice(slice);
            let mut cursor = offsets;
            for b in &scratch {
                let q = quadrant(cell.center, b.position);
                slice[cursor[q]] = *b;
                cursor[q] += 1;
            }

            let first_child = cells.len();
            let quarter = 0.5 * cell.half_width;
            let mut num_children = 0;
            for q in 0..4 {
                if counts[q] == 0 {
                    continue;
                }
                let dx = if q & 1 == 1 { quarter } else { -quarter };
                let dy = if q & 2 == 2 { quarter } else { -quarter };
                let start = cell.bodies.start + offsets[q];
                cells.push(Cell {
                    center: Point2::new(cell.center.x + dx, cell.center.y + dy),
                    half_width: quarter,
                    level: cell.level + 1,
                    bodies: start..start + counts[q],
                    first_child: 0,
                    num_children: 0,
                    parent: Some(i),
                });
                num_children += 1;
            }
            cells[i].first_child = first_child;
            cells[i].num_children = num_children;
            i += 1;
        }

        let permutation = bodies.iter().map(|b| b.index).collect();
        Ok(Tree {
            cells,
            bodies,
            permutation,
            ncrit,
            max_level,
        })
    }

    /// Geometry-only tree (all charges zero).
    pub fn from_points(points: &[Point2], ncrit: usize, max_level: usize) -> Result<Self> {
        Self::build(
            points,
            &vec![Complex64::new(0.0, 0.0); points.len()],
            ncrit,
            max_level,
        )
    }

    pub fn root(&self) -> &Cell {
        &self.cells[0]
    }

    pub fn depth(&self) -> usize {
        self.cells.iter().map(|c| c.level).max().unwrap_or(0)
    }

    pub fn leaves(&self) -> impl Iterator<Item = usize> + '_ {
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_leaf())
            .map(|(i, _)| i)
    }

    /// Reorders `values` (input order) into tree order.
    pub fn to_tree_order<T: Copy>(&self, values: &[T]) -> Vec<T> {
        self.permutation.iter().map(|&i| values[i]).collect()
    }

    /// Scatters `values` (tree order) back into input order.
    pub fn to_input_order<T: Copy + Default>(&self, values: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); values.len()];
        for (k, &i) in self.permutation.iter().enumerate() {
            out[i] = values[k];
        }
        out
    }

    /// Checks the structural invariants; used by tests and debug assertions.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let n = self.bodies.len();
        let mut seen = vec![false; n];
        for &i in &self.permutation {
            if i >= n || seen[i] {
                return Err(format!("permutation is not a bijection at {i}"));
            }
            seen[i] = true;
        }
        let mut covered = vec![0u8; n];
        for (ci, cell) in self.cells.iter().enumerate() {
            for b in &self.bodies[cell.bodies.clone()] {
                if !cell.contains(b.position) {
                    return Err(format!("body {} outside cell {ci}", b.index));
                }
            }
            if cell.is_leaf() {
                if cell.len() > self.ncrit && cell.level < self.max_level {
                    return Err(format!("leaf {ci} holds {} > ncrit bodies", cell.len()));
                }
                for k in cell.bodies.clone() {
                    covered[k] += 1;
                }
            } else {
                let mut next = cell.bodies.start;
                for child in cell.children() {
                    let c = &self.cells[child];
                    if c.bodies.start != next || c.level != cell.level + 1 {
                        return Err(format!("child {child} of {ci} breaks the partition"));
                    }
                    if (c.half_width - 0.5 * cell.half_width).abs() > 1e-12 * cell.half_width {
                        return Err(format!("child {child} is not a quadrant of {ci}"));
                    }
                    next = c.bodies.end;
                }
                if next != cell.bodies.end {
                    return Err(format!("children of {ci} do not cover its bodies"));
                }
            }
        }
        if covered.iter().any(|&c| c != 1) {
            return Err("leaf ranges do not partition the bodies".into());
        }
        Ok(())
    }
}

/// Half-open quadrants, low-inclusive: a point on a split line goes to the
/// child with the larger coordinate.
fn quadrant(center: Point2, p: Point2) -> usize {
    usize::from(p.x >= center.x) | (usize::from(p.y >= center.y) << 1)
}

fn bounding_square(points: &[Point2]) -> (Point2, f64) {
    let (mut lo_x, mut lo_y) = (f64::INFINITY, f64::INFINITY);
    let (mut hi_x, mut hi_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for p in points {
        lo_x = lo_x.min(p.x);
        lo_y = lo_y.min(p.y);
        hi_x = hi_x.max(p.x);
        hi_y = hi_y.max(p.y);
    }
    let center = Point2::new(0.5 * (lo_x + hi_x), 0.5 * (lo_y + hi_y));
    let half = 0.5 * (hi_x - lo_x).max(hi_y - lo_y);
    let scale = center.x.abs().max(center.y.abs()).max(half).max(1.0);
    let half = (half * (1.0 + ROOT_MARGIN)).max(ROOT_MARGIN * scale);
    (center, half)
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct InteractionLists {
    /// `(source cell, target cell)` pairs accepted by the MAC.
    pub far: Vec<(usize, usize)>,
    /// `(source leaf, target leaf)` pairs evaluated directly.
    pub near: Vec<(usize, usize)>,
}

/// Multipole acceptance: centers farther apart than `(R_s + R_t) / theta`.
pub fn mac(source: &Cell, target: &Cell, theta: f64) -> bool {
    let d = (source.center - target.center).norm();
    d * theta > source.radius() + target.radius()
}

/// Dual-tree traversal with the geometric MAC only.
pub fn dual_traversal(source: &Tree, target: &Tree, theta: f64) -> InteractionLists {
    dual_traversal_limited(source, target, theta, f64::INFINITY)
}

/// Dual-tree traversal where, in addition to the MAC, a far pair needs
/// `R_s + R_t <= max_pair_radius`. The FMM uses this to keep translations
/// inside the low-frequency range of its truncated expansions.
pub fn dual_traversal_limited(
    source: &Tree,
    target: &Tree,
    theta: f64,
    max_pair_radius: f64,
) -> InteractionLists {
    assert!(
        theta > 0.0 && theta <= 1.0,
        "theta must lie in (0, 1], got {theta}"
    );
    let mut lists = InteractionLists::default();
    let mut stack = vec![(0usize, 0usize)];
    while let Some((s, t)) = stack.pop() {
        let sc = &source.cells[s];
        let tc = &target.cells[t];
        if sc.radius() + tc.radius() <= max_pair_radius && mac(sc, tc, theta) {
            lists.far.push((s, t));
            continue;
        }
        match (sc.is_leaf(), tc.is_leaf()) {
            (true, true) => lists.near.push((s, t)),
            (false, true) => push_rev(&mut stack, sc.children().map(|c| (c, t))),
            (true, false) => push_rev(&mut stack, tc.children().map(|c| (s, c))),
            (false, false) => {
                if sc.half_width > tc.half_width {
                    push_rev(&mut stack, sc.children().map(|c| (c, t)));
                } else {
                    push_rev(&mut stack, tc.children().map(|c| (s, c)));
                }
            }
        }
    }
    lists
}

/// Pushes in reverse so pairs are popped in child order.
fn push_rev(
    stack: &mut Vec<(usize, usize)>,
    pairs: impl DoubleEndedIterator<Item = (usize, usize)>,
) {
    stack.extend(pairs.rev());
}
