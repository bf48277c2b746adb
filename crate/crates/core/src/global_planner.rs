//! Waypoint search over the nest cells of both coarse grids.
//!
//! Graph nodes are nest cells of either grid. Cells of the same grid are
//! joined by 4-adjacency; cells of different grids are joined when their
//! footprints overlap. Every edge costs its center-to-center distance scaled
//! by `1 + λ·(10 − r)`, where `r` is the lower rank of its endpoints. Costs
//! are accumulated as integer nanometers so that equal-cost routes compare
//! exactly regardless of summation order.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};
use core::fmt;

use crate::corridor::{overlapping_cells, DualGrid};
use crate::geometry::Point;
use crate::grid::{Cell, Grid};
use crate::swarm::NestMap;

/// Integer cost units per meter.
pub const COST_SCALE: f64 = 1e9;

#[derive(Debug, Clone, PartialEq)]
pub enum PlanError {
    PointOutsideGrid(Point),
    StartNotNavigable,
    GoalNotNavigable,
    NoPath,
}

impl fmt::Display for PlanError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointOutsideGrid(p) => write!(f, "point ({}, {}) lies outside the terrain", p.x, p.y),
            Self::StartNotNavigable => write!(f, "start is not inside any nest"),
            Self::GoalNotNavigable => write!(f, "goal is not inside any nest"),
            Self::NoPath => write!(f, "no route through the nests connects start and goal"),
        }
    }
}

impl core::error::Error for PlanError {}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct PlannerParams {
    /// Weight of the rank penalty.
    pub lambda: f64,
}

impl Default for PlannerParams {
    fn default() -> Self {
        Self { lambda: 0.1 }
    }
}

/// A nest cell of grid `grid` (0 = A, 1 = B). Orders as `(grid, i, j)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct NodeKey {
    pub grid: u8,
    pub i: usize,
    pub j: usize,
}

impl NodeKey {
    pub fn new(grid: u8, (i, j): Cell) -> Self {
        Self { grid, i, j }
    }

    pub fn cell(&self) -> Cell {
        (self.i, self.j)
    }
}

/// Edge cost in integer units.
pub fn edge_cost_units(distance: f64, rank: u8, lambda: f64) -> u64 {
    let penalty = 1.0 + lambda * (10.0 - f64::from(rank));
    libm::round(distance * penalty * COST_SCALE) as u64
}

/// The navigability graph over both grids.
#[derive(Debug, Clone)]
pub struct NavGraph {
    keys: Vec<NodeKey>,
    centers: Vec<Point>,
    index: [Grid<Option<usize>>; 2],
    adjacency: Vec<Vec<(usize, u64)>>,
}

impl NavGraph {
    pub fn build(dual: &DualGrid, nests: &[NestMap; 2], params: &PlannerParams) -> Self {
        let grids = dual.grids();
        let mut keys = Vec::new();
        let mut centers = Vec::new();
        let mut index = [
            Grid::filled(grids[0].rows(), grids[0].cols(), None),
            Grid::filled(grids[1].rows(), grids[1].cols(), None),
        ];
        for g in 0..2 {
            for cell in nests[g].cells() {
                if !grids[g].cells().contains(cell.0, cell.1) {
                    continue;
                }
                index[g][cell] = Some(keys.len());
                keys.push(NodeKey::new(g as u8, cell));
                centers.push(grids[g].cell_center(cell));
            }
        }
        let mut adjacency = vec![Vec::new(); keys.len()];
        for (u, key) in keys.iter().enumerate() {
            let g = key.grid as usize;
            let grid = &grids[g];
            let rank_u = grid.cell(key.cell()).rank;
            let mut link = |v: usize, rank_v: u8| {
                let d = centers[u].distance(centers[v]);
                adjacency[u].push((v, edge_cost_units(d, rank_u.min(rank_v), params.lambda)));
            };
            for n in grid.cells().edge_neighbors(key.i, key.j) {
                if let Some(v) = index[g][n] {
                    link(v, grid.cell(n).rank);
                }
            }
            let other = 1 - g;
            for n in overlapping_cells(&grids[other], &grid.cell_bounds(key.cell())) {
                if let Some(v) = index[other][n] {
                    link(v, grids[other].cell(n).rank);
                }
            }
        }
        Self {
            keys,
            centers,
            index,
            adjacency,
        }
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }

    pub fn key(&self, node: usize) -> NodeKey {
        self.keys[node]
    }

    pub fn center(&self, node: usize) -> Point {
        self.centers[node]
    }

    pub fn node(&self, key: NodeKey) -> Option<usize> {
        self.index
            .get(key.grid as usize)?
            .get(key.i, key.j)
            .copied()
            .flatten()
    }

    /// Outgoing `(node, cost_units)` pairs.
    pub fn edges(&self, node: usize) -> &[(usize, u64)] {
        &self.adjacency[node]
    }

    /// Lowest-cost route from `start` to `goal` as node indices plus cost.
    pub fn astar(&self, start: usize, goal: usize) -> Option<(Vec<usize>, u64)> {
        let target = self.centers[goal];
        // shrink the straight-line bound so per-edge rounding never makes it overestimate
        let heuristic = |n: usize| {
            libm::floor(self.centers[n].distance(target) * COST_SCALE * (1.0 - 1e-6)) as u64
        };
        let mut best = vec![u64::MAX; self.len()];
        let mut parent = vec![usize::MAX; self.len()];
        let mut open = BinaryHeap::new();
        best[start] = 0;
        open.push(Reverse(Entry {
            f: heuristic(start),
            key: self.keys[start],
            node: start,
            g: 0,
        }));
        while let Some(Reverse(Entry { node, g, .. })) = open.pop() {
            if g > best[node] {
                continue;
            }
            if node == goal {
                let mut path = vec![goal];
                let mut cur = goal;
                while cur != start {
                    cur = parent[cur];
                    path.push(cur);
                }
                path.reverse();
                return Some((path, g));
            }
            for &(next, cost) in &self.adjacency[node] {
                let candidate = g + cost;
                if candidate < best[next] {
                    best[next] = candidate;
                    parent[next] = node;
                    open.push(Reverse(Entry {
                        f: candidate + heuristic(next),
                        key: self.keys[next],
                        node: next,
                        g: candidate,
                    }));
                }
            }
        }
        None
    }
}

#[derive(Debug, PartialEq, Eq)]
struct Entry {
    f: u64,
    key: NodeKey,
    node: usize,
    g: u64,
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.f, self.key, self.g).cmp(&(other.f, other.key, other.g))
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct GlobalPath {
    pub waypoints: Vec<Point>,
    pub nodes: Vec<NodeKey>,
    /// Accumulated edge cost in meters-equivalent.
    pub cost: f64,
    pub cost_units: u64,
    /// Polyline length of `waypoints`.
    pub length: f64,
}

/// The nest cell a point snaps to: grid A's cell if it is a nest member,
/// otherwise grid B's.
pub fn snap(dual: &DualGrid, nests: &[NestMap; 2], p: Point) -> Option<NodeKey> {
    dual.grids().iter().zip(nests).enumerate().find_map(|(g, (grid, n))| {
        grid.cell_at(p)
            .filter(|&c| n.contains(c))
            .map(|c| NodeKey::new(g as u8, c))
    })
}

/// Nest cell whose center is closest to `p`, ties to the smaller key.
pub fn nearest_nest_cell(dual: &DualGrid, nests: &[NestMap; 2], p: Point) -> Option<NodeKey> {
    let mut best: Option<(f64, NodeKey)> = None;
    for (g, (grid, n)) in dual.grids().iter().zip(nests).enumerate() {
        for cell in n.cells() {
            let d = grid.cell_center(cell).distance(p);
            if best.is_none_or(|(bd, _)| d < bd) {
                best = Some((d, NodeKey::new(g as u8, cell)));
            }
        }
    }
    best.map(|(_, k)| k)
}

/// Plans from `start` to `goal`; both must be navigable.
pub fn plan_global(
    dual: &DualGrid,
    nests: &[NestMap; 2],
    start: Point,
    goal: Point,
    params: &PlannerParams,
) -> Result<GlobalPath, PlanError> {
    for p in [start, goal] {
        if !dual.contains_point(p) {
            return Err(PlanError::PointOutsideGrid(p));
        }
    }
    let from = snap(dual, nests, start).ok_or(PlanError::StartNotNavigable)?;
    let to = snap(dual, nests, goal).ok_or(PlanError::GoalNotNavigable)?;
    plan_between(dual, nests, from, to, params)
}

/// Like [`plan_global`] but a non-navigable start is replaced by the nearest
/// nest cell. Used when replanning from wherever the robot happens to be.
pub fn replan_from(
    dual: &DualGrid,
    nests: &[NestMap; 2],
    pose: Point,
    goal: Point,
    params: &PlannerParams,
) -> Result<GlobalPath, PlanError> {
    if !dual.contains_point(goal) {
        return Err(PlanError::PointOutsideGrid(goal));
    }
    let to = snap(dual, nests, goal).ok_or(PlanError::GoalNotNavigable)?;
    let from = snap(dual, nests, pose)
        .or_else(|| nearest_nest_cell(dual, nests, pose))
        .ok_or(PlanError::StartNotNavigable)?;
    plan_between(dual, nests, from, to, params)
}

pub fn plan_between(
    dual: &DualGrid,
    nests: &[NestMap; 2],
    from: NodeKey,
    to: NodeKey,
    params: &PlannerParams,
) -> Result<GlobalPath, PlanError> {
    let graph = NavGraph::build(dual, nests, params);
    let start = graph.node(from).ok_or(PlanError::StartNotNavigable)?;
    let goal = graph.node(to).ok_or(PlanError::GoalNotNavigable)?;
    let (route, units) = graph.astar(start, goal).ok_or(PlanError::NoPath)?;
    let waypoints: Vec<Point> = route.iter().map(|&n| graph.center(n)).collect();
    let length = waypoints.windows(2).map(|w| w[0].distance(w[1])).sum();
    Ok(GlobalPath {
        nodes: route.iter().map(|&n| graph.key(n)).collect(),
        waypoints,
        cost: units as f64 / COST_SCALE,
        cost_units: units,
        length,
    })
}
