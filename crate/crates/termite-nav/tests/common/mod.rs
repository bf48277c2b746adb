//! Scenario builders and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use termite_nav_core::corridor::{CoarseCell, CoarseGrid, DualGrid};
use termite_nav_core::geometry::{Aabb, Point};
use termite_nav_core::grid::{Cell, Grid};
use termite_nav_core::sim::{Crate, Scenario};
use termite_nav_core::swarm::{secondary_seed, NestMap};
use termite_nav_core::terrain::{HeightMap, SoilCategory, TerrainCell, TerrainGrid};

/// Flat gravel, 64×64 cells of 0.5 m, from a 256×128 heightmap.
pub fn flat_gravel(start: Point, goal: Point) -> Scenario {
    let hm = HeightMap::constant(256, 128, 100).unwrap();
    let soil = Grid::filled(64, 64, SoilCategory::Gravel);
    let mut s = Scenario::new(hm, soil, start, goal);
    s.terrain.cell_size_m = 0.5;
    s
}

pub const ROUTE_START: Point = Point { x: 3.0, y: 17.0 };
pub const ROUTE_GOAL: Point = Point { x: 29.0, y: 17.0 };

/// Three 1 m crates on the start–goal line, hidden from the planner. The
/// seed drives the swarm and jitters each crate by up to ±0.4 m.
pub fn hidden_crates(seed: u64) -> Scenario {
    let mut s = flat_gravel(ROUTE_START, ROUTE_GOAL);
    s.swarm.seed = seed;
    let mut z = seed;
    for x in [10.0, 16.0, 22.0] {
        z = secondary_seed(z);
        let dx = ((z & 0xffff) as f64 / 65535.0 - 0.5) * 0.8;
        let dy = (((z >> 16) & 0xffff) as f64 / 65535.0 - 0.5) * 0.8;
        s.crates.push(Crate::hidden(Aabb::centered(Point::new(x + dx, ROUTE_GOAL.y + dy), 1.0, 1.0)));
    }
    s
}

/// A 6 m square of Rock in the ground truth, across the route; the
/// database says Gravel everywhere.
pub fn rock_patch() -> Scenario {
    let mut s = flat_gravel(ROUTE_START, ROUTE_GOAL);
    let mut truth = Grid::filled(64, 64, SoilCategory::Gravel);
    for r in 28..40 {
        for c in 26..38 {
            truth[(r, c)] = SoilCategory::Rock;
        }
    }
    s.ground_truth_soil = Some(truth);
    s
}

/// A terrain cell with the given rank, using only published goodness values.
pub fn cell_with_rank(rank: u8) -> TerrainCell {
    let (grad, soil) = match rank {
        2 => (1, SoilCategory::Rock),
        3 => (2, SoilCategory::Rock),
        4 => (1, SoilCategory::Clay),
        5 => (2, SoilCategory::Clay),
        6 => (3, SoilCategory::Clay),
        7 => (4, SoilCategory::Clay),
        8 => (5, SoilCategory::Clay),
        9 => (5, SoilCategory::Sand),
        10 => (5, SoilCategory::Gravel),
        _ => panic!("rank {rank} out of range"),
    };
    let soil_goodness = rank - grad;
    TerrainCell {
        height: 0,
        soil,
        gradient_goodness: grad,
        soil_goodness,
        rank,
    }
}

pub fn terrain_from_ranks(ranks: &Grid<u8>, cell_size: f64) -> TerrainGrid {
    TerrainGrid::from_cells(ranks.map(|&r| cell_with_rank(r)), cell_size).unwrap()
}

/// Blobby ranks: 3×3 box-filtered uniform noise quantised to [2, 10].
pub fn blobby_ranks(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Grid<u8> {
    let noise = Grid::from_fn(rows, cols, |_, _| rng.random::<f64>());
    Grid::from_fn(rows, cols, |r, c| {
        let mut sum = 0.0;
        let mut n = 0.0;
        for rr in r.saturating_sub(1)..(r + 2).min(rows) {
            for cc in c.saturating_sub(1)..(c + 2).min(cols) {
                sum += noise[(rr, cc)];
                n += 1.0;
            }
        }
        // a 3×3 mean concentrates near 0.5; stretch it back out
        let v = ((sum / n - 0.5) * 3.0 + 0.5).clamp(0.0, 0.999);
        2 + (v * 9.0) as u8
    })
}

pub fn coarse_grid(ranks: &Grid<u8>, swathe: &Grid<bool>) -> CoarseGrid {
    let cells = Grid::from_fn(ranks.rows(), ranks.cols(), |r, c| CoarseCell {
        rank: ranks[(r, c)],
        in_swathe: swathe[(r, c)],
    });
    CoarseGrid::from_cells(0.0, 2.0, cells)
}

/// 4-connected components of the cells where `member` holds.
pub fn flood_fill(rows: usize, cols: usize, member: impl Fn(Cell) -> bool) -> Grid<Option<usize>> {
    let mut label = Grid::filled(rows, cols, None);
    let mut next = 0;
    for r in 0..rows {
        for c in 0..cols {
            if label[(r, c)].is_some() || !member((r, c)) {
                continue;
            }
            let mut queue = VecDeque::from([(r, c)]);
            label[(r, c)] = Some(next);
            while let Some((cr, cc)) = queue.pop_front() {
                let around = [
                    (cr.wrapping_sub(1), cc),
                    (cr + 1, cc),
                    (cr, cc.wrapping_sub(1)),
                    (cr, cc + 1),
                ];
                for (nr, nc) in around {
                    if nr < rows && nc < cols && label[(nr, nc)].is_none() && member((nr, nc)) {
                        label[(nr, nc)] = Some(next);
                        queue.push_back((nr, nc));
                    }
                }
            }
            next += 1;
        }
    }
    label
}

/// True when `cells` form one 4-connected set.
pub fn is_four_connected(cells: &[Cell]) -> bool {
    let Some(&first) = cells.first() else {
        return true;
    };
    let set: std::collections::BTreeSet<Cell> = cells.iter().copied().collect();
    let mut seen = std::collections::BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some((r, c)) = queue.pop_front() {
        for n in [(r.wrapping_sub(1), c), (r + 1, c), (r, c.wrapping_sub(1)), (r, c + 1)] {
            if set.contains(&n) && seen.insert(n) {
                queue.push_back(n);
            }
        }
    }
    seen.len() == set.len()
}

/// Node of the brute-force navigability graph.
pub type OracleNode = (usize, Cell);

fn cell_box(grid: &CoarseGrid, (i, j): Cell) -> Aabb {
    let s = grid.cell_size();
    let o = grid.origin();
    Aabb {
        min_x: o + j as f64 * s,
        min_y: o + i as f64 * s,
        max_x: o + (j + 1) as f64 * s,
        max_y: o + (i + 1) as f64 * s,
    }
}

/// Every nest cell of both grids with its outgoing edges, built by brute
/// force from geometry: 4-adjacency inside a grid, and any positive-area
/// overlap across grids. Edge cost is the center distance scaled by
/// `1 + λ(10 − min rank)`, in nanometer units.
pub fn oracle_graph(dual: &DualGrid, nests: &[NestMap; 2], lambda: f64) -> BTreeMap<OracleNode, Vec<(OracleNode, u64)>> {
    let grids = dual.grids();
    let nodes: Vec<OracleNode> = (0..2)
        .flat_map(|g| nests[g].nests().values().flatten().map(move |&c| (g, c)))
        .collect();
    let center = |(g, c): OracleNode| {
        let b = cell_box(&grids[g], c);
        Point::new((b.min_x + b.max_x) / 2.0, (b.min_y + b.max_y) / 2.0)
    };
    let rank = |(g, c): OracleNode| grids[g].cells()[c].rank;
    let mut graph = BTreeMap::new();
    for &u in &nodes {
        let mut edges = Vec::new();
        for &v in &nodes {
            let linked = if u.0 == v.0 {
                u.1 .0.abs_diff(v.1 .0) + u.1 .1.abs_diff(v.1 .1) == 1
            } else {
                let (a, b) = (cell_box(&grids[u.0], u.1), cell_box(&grids[v.0], v.1));
                let w = a.max_x.min(b.max_x) - a.min_x.max(b.min_x);
                let h = a.max_y.min(b.max_y) - a.min_y.max(b.min_y);
                w > 1e-9 && h > 1e-9
            };
            if linked {
                let d = center(u).distance(center(v));
                let penalty = 1.0 + lambda * (10.0 - f64::from(rank(u).min(rank(v))));
                edges.push((v, (d * penalty * 1e9).round() as u64));
            }
        }
        graph.insert(u, edges);
    }
    graph
}

pub fn dijkstra(graph: &BTreeMap<OracleNode, Vec<(OracleNode, u64)>>, from: OracleNode, to: OracleNode) -> Option<u64> {
    let mut dist: BTreeMap<OracleNode, u64> = BTreeMap::from([(from, 0)]);
    let mut heap = BinaryHeap::from([Reverse((0u64, from))]);
    while let Some(Reverse((d, u))) = heap.pop() {
        if u == to {
            return Some(d);
        }
        if dist.get(&u).is_some_and(|&best| d > best) {
            continue;
        }
        for &(v, w) in &graph[&u] {
            let nd = d + w;
            if dist.get(&v).is_none_or(|&best| nd < best) {
                dist.insert(v, nd);
                heap.push(Reverse((nd, v)));
            }
        }
    }
    None
}

/// Nest cell holding `p`, grid A first, found by scanning every nest cell's
/// half-open footprint.
pub fn oracle_snap(dual: &DualGrid, nests: &[NestMap; 2], p: Point) -> Option<OracleNode> {
    (0..2).find_map(|g| {
        nests[g].nests().values().flatten().find_map(|&c| {
            let b = cell_box(&dual.grids()[g], c);
            (p.x >= b.min_x && p.x < b.max_x && p.y >= b.min_y && p.y < b.max_y).then_some((g, c))
        })
    })
}

/// Random nests: each swathe cell joins with probability `p`, then
/// neighbouring picks merge.
pub fn random_nests(rng: &mut ChaCha8Rng, grid: &CoarseGrid, p: f64) -> NestMap {
    let mut nests = NestMap::for_grid(grid);
    let picks: Vec<Cell> = grid.swathe_cells().filter(|_| rng.random::<f64>() < p).collect();
    for cell in picks {
        nests.insert_nest([cell]);
    }
    termite_nav_core::swarm::merge_nests(&nests)
}
