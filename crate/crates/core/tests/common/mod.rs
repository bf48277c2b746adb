#![allow(dead_code)]

use std::collections::VecDeque;

use termite_nav_core::corridor::{CoarseCell, CoarseGrid};
use termite_nav_core::geometry::Point;
use termite_nav_core::grid::{Cell, Grid};
use termite_nav_core::sim::Scenario;
use termite_nav_core::terrain::{HeightMap, SoilCategory, TerrainCell, TerrainGrid};

/// Flat gravel, 64×64 cells of 0.5 m.
pub fn flat_gravel(start: Point, goal: Point) -> Scenario {
    let hm = HeightMap::constant(256, 128, 100).unwrap();
    let soil = Grid::filled(64, 64, SoilCategory::Gravel);
    let mut s = Scenario::new(hm, soil, start, goal);
    s.terrain.cell_size_m = 0.5;
    s
}

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
        _ => (5, SoilCategory::Gravel),
    };
    TerrainCell {
        height: 0,
        soil,
        gradient_goodness: grad,
        soil_goodness: rank - grad,
        rank,
    }
}

pub fn terrain_from_ranks(ranks: &Grid<u8>, cell_size: f64) -> TerrainGrid {
    TerrainGrid::from_cells(ranks.map(|&r| cell_with_rank(r)), cell_size).unwrap()
}

pub fn coarse_from(ranks: &[&[u8]]) -> CoarseGrid {
    let cells = Grid::from_fn(ranks.len(), ranks[0].len(), |r, c| CoarseCell {
        rank: ranks[r][c],
        in_swathe: true,
    });
    CoarseGrid::from_cells(0.0, 2.0, cells)
}

pub fn coarse_grid(ranks: &Grid<u8>, swathe: &Grid<bool>) -> CoarseGrid {
    let cells = Grid::from_fn(ranks.rows(), ranks.cols(), |r, c| CoarseCell {
        rank: ranks[(r, c)],
        in_swathe: swathe[(r, c)],
    });
    CoarseGrid::from_cells(0.0, 2.0, cells)
}

/// 4-connected component labels of the cells where `member` holds.
pub fn components(rows: usize, cols: usize, member: impl Fn(Cell) -> bool) -> Grid<Option<usize>> {
    let mut label = Grid::filled(rows, cols, None);
    let mut next = 0;
    for r in 0..rows {
        for c in 0..cols {
            if label[(r, c)].is_some() || !member((r, c)) {
                continue;
            }
            label[(r, c)] = Some(next);
            let mut queue = VecDeque::from([(r, c)]);
            while let Some((cr, cc)) = queue.pop_front() {
                for (nr, nc) in [(cr.wrapping_sub(1), cc), (cr + 1, cc), (cr, cc.wrapping_sub(1)), (cr, cc + 1)] {
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
