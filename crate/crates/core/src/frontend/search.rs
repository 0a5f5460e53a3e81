//! A* over an implicit 26-connected lattice anchored at the start point.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::field::{FieldKind, FieldScratch, ParametricField};
use crate::geometry::{Aabb, Point3};

use super::WaypointPath;

pub type LatticeCell = [i64; 3];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SearchConfig {
    /// Lattice pitch in meters.
    pub pitch: f64,
    /// Cells whose score exceeds this are blocked.
    pub threshold: f64,
    /// Search volume. `None` uses the start/goal box grown by `margin`.
    pub bounds: Option<Aabb>,
    pub margin: f64,
    /// Maximum number of expanded nodes.
    pub max_nodes: usize,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            pitch: 0.1,
            threshold: 0.5,
            bounds: None,
            margin: 1.0,
            max_nodes: 2_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchOutcome {
    pub path: WaypointPath,
    pub nodes_visited: usize,
    /// Lattice path cost (sum of cell-to-cell step lengths).
    pub lattice_cost: f64,
}

#[derive(Clone, Copy)]
struct Open {
    f: f64,
    g: f64,
    cell: LatticeCell,
}

impl PartialEq for Open {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Open {}
impl PartialOrd for Open {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Open {
    // Reversed so that BinaryHeap pops the smallest f, then the
    // lexicographically smallest cell.
    fn cmp(&self, other: &Self) -> Ordering {
        other.f.total_cmp(&self.f).then_with(|| other.cell.cmp(&self.cell))
    }
}

/// The 26 neighbor offsets in lexicographic order.
pub fn neighbor_offsets() -> Vec<LatticeCell> {
    let mut out = Vec::with_capacity(26);
    for dx in -1..=1 {
        for dy in -1..=1 {
            for dz in -1..=1 {
                if (dx, dy, dz) != (0, 0, 0) {
                    out.push([dx, dy, dz]);
                }
            }
        }
    }
    out
}

struct Lattice<'a> {
    field: &'a ParametricField,
    origin: Point3,
    pitch: f64,
    threshold: f64,
    bounds: Aabb,
    blocked: HashMap<LatticeCell, bool>,
    scratch: FieldScratch,
}

impl Lattice<'_> {
    fn point(&self, c: LatticeCell) -> Point3 {
        [
            self.origin[0] + c[0] as f64 * self.pitch,
            self.origin[1] + c[1] as f64 * self.pitch,
            self.origin[2] + c[2] as f64 * self.pitch,
        ]
    }

    fn is_blocked(&mut self, c: LatticeCell) -> Result<bool> {
        if let Some(&b) = self.blocked.get(&c) {
            return Ok(b);
        }
        let p = self.point(c);
        let b = !self.bounds.contains(&p) || self.field.value_with(&p, &mut self.scratch)? > self.threshold;
        self.blocked.insert(c, b);
        Ok(b)
    }
}

/// Lattice-optimal path from `start` to `goal`. The final lattice point is
/// replaced by `goal` itself, so both endpoints are exact.
pub fn search_initial_path(
    field: &ParametricField,
    start: Point3,
    goal: Point3,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    field.require_kind(FieldKind::Occupancy)?;
    if !(cfg.pitch > 0.0) || !cfg.pitch.is_finite() {
        return Err(invalid("pitch", "must be positive"));
    }
    if start.iter().chain(&goal).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("search endpoints"));
    }
    let mut scratch = FieldScratch::for_field(field);
    for (which, p) in [("start", start), ("goal", goal)] {
        let score = field.value_with(&p, &mut scratch)?;
        if score > cfg.threshold {
            return Err(Error::EndpointOccupied {
                which,
                score,
                threshold: cfg.threshold,
            });
        }
    }
    let bounds = cfg.bounds.unwrap_or_else(|| {
        let m = cfg.margin.max(cfg.pitch);
        Aabb::new(
            std::array::from_fn(|a| start[a].min(goal[a]) - m),
            std::array::from_fn(|a| start[a].max(goal[a]) + m),
        )
    });
    let mut lat = Lattice {
        field,
        origin: start,
        pitch: cfg.pitch,
        threshold: cfg.threshold,
        bounds,
        blocked: HashMap::new(),
        scratch,
    };
    let target: LatticeCell = std::array::from_fn(|a| ((goal[a] - start[a]) / cfg.pitch).round() as i64);
    let h = |c: LatticeCell| -> f64 {
        let d: [f64; 3] = std::array::from_fn(|a| (c[a] - target[a]) as f64);
        cfg.pitch * (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt()
    };
    let offsets = neighbor_offsets();
    let step_len: Vec<f64> = offsets
        .iter()
        .map(|o| cfg.pitch * ((o[0] * o[0] + o[1] * o[1] + o[2] * o[2]) as f64).sqrt())
        .collect();

    let origin_cell = [0i64; 3];
    let mut best_g: HashMap<LatticeCell, f64> = HashMap::new();
    let mut parent: HashMap<LatticeCell, LatticeCell> = HashMap::new();
    let mut heap = BinaryHeap::new();
    best_g.insert(origin_cell, 0.0);
    heap.push(Open {
        f: h(origin_cell),
        g: 0.0,
        cell: origin_cell,
    });
    let mut expanded = 0usize;
    while let Some(Open { g, cell, .. }) = heap.pop() {
        if g > best_g[&cell] {
            continue;
        }
        expanded += 1;
        if cell == target {
            let mut cells = vec![cell];
            let mut c = cell;
            while let Some(&p) = parent.get(&c) {
                cells.push(p);
                c = p;
            }
            cells.reverse();
            let mut points: Vec<Point3> = cells.iter().map(|&c| lat.point(c)).collect();
            points[0] = start;
            let last = points.len() - 1;
            if last == 0 {
                points.push(goal);
            } else {
                points[last] = goal;
            }
            return Ok(SearchOutcome {
                path: WaypointPath::new(points)?,
                nodes_visited: expanded,
                lattice_cost: g,
            });
        }
        if expanded >= cfg.max_nodes {
            break;
        }
        for (o, &len) in offsets.iter().zip(&step_len) {
            let n = [cell[0] + o[0], cell[1] + o[1], cell[2] + o[2]];
            if n != target && lat.is_blocked(n)? {
                continue;
            }
            let ng = g + len;
            if best_g.get(&n).is_none_or(|&old| ng < old) {
                best_g.insert(n, ng);
                parent.insert(n, cell);
                heap.push(Open { f: ng + h(n), g: ng, cell: n });
            }
        }
    }
    Err(Error::Unreachable { nodes_visited: expanded })
}
