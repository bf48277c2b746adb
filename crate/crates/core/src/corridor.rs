//! Start–goal swathe and the pair of offset coarse grids laid over it.

use alloc::vec::Vec;
use core::fmt;

use crate::geometry::{point_segment_distance, Aabb, Point};
use crate::grid::{Cell, Grid};
use crate::swarm::NestMap;
use crate::terrain::TerrainGrid;

/// Tolerance used when deciding whether two cell footprints overlap.
const OVERLAP_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum CorridorError {
    PointOutsideGrid(Point),
    DegenerateEndpoints,
    EmptySwathe,
    InvalidParameter(&'static str),
}

impl fmt::Display for CorridorError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PointOutsideGrid(p) => write!(f, "point ({}, {}) lies outside the terrain", p.x, p.y),
            Self::DegenerateEndpoints => write!(f, "start and goal coincide"),
            Self::EmptySwathe => write!(f, "swathe contains no cells"),
            Self::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for CorridorError {}

/// Fine-grid cells within `half_width` of the start–goal segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Swathe {
    members: Grid<bool>,
    half_width: f64,
    start: Point,
    goal: Point,
}

impl Swathe {
    pub fn contains(&self, cell: Cell) -> bool {
        self.members.get(cell.0, cell.1).copied().unwrap_or(false)
    }

    pub fn members(&self) -> &Grid<bool> {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.as_slice().iter().filter(|&&m| m).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn endpoints(&self) -> (Point, Point) {
        (self.start, self.goal)
    }
}

/// Selects every fine cell whose center lies within `half_width` of the
/// straight start–goal segment. The cells holding `start` and `goal` are
/// always members.
pub fn build_swathe(
    grid: &TerrainGrid,
    start: Point,
    goal: Point,
    half_width: f64,
) -> Result<Swathe, CorridorError> {
    if !(half_width > 0.0) {
        return Err(CorridorError::InvalidParameter("swathe half-width must be positive"));
    }
    let start_cell = grid
        .cell_at(start)
        .ok_or(CorridorError::PointOutsideGrid(start))?;
    let goal_cell = grid.cell_at(goal).ok_or(CorridorError::PointOutsideGrid(goal))?;
    if start == goal {
        return Err(CorridorError::DegenerateEndpoints);
    }
    let mut members = Grid::from_fn(grid.rows(), grid.cols(), |r, c| {
        point_segment_distance(grid.cell_center((r, c)), start, goal) <= half_width
    });
    members[start_cell] = true;
    members[goal_cell] = true;
    Ok(Swathe {
        members,
        half_width,
        start,
        goal,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct CoarseCell {
    /// Minimum rank over every fine cell the coarse cell overlaps.
    pub rank: u8,
    pub in_swathe: bool,
}

/// A coarse grid whose cell `(i, j)` spans
/// `[origin + j·size, origin + (j+1)·size) × [origin + i·size, origin + (i+1)·size)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoarseGrid {
    origin: f64,
    cell_size: f64,
    cells: Grid<CoarseCell>,
}

impl CoarseGrid {
    /// Builds a grid directly from cells; mostly useful for tests and tools.
    pub fn from_cells(origin: f64, cell_size: f64, cells: Grid<CoarseCell>) -> Self {
        Self {
            origin,
            cell_size,
            cells,
        }
    }

    pub fn rows(&self) -> usize {
        self.cells.rows()
    }

    pub fn cols(&self) -> usize {
        self.cells.cols()
    }

    pub fn cells(&self) -> &Grid<CoarseCell> {
        &self.cells
    }

    pub fn cell(&self, cell: Cell) -> &CoarseCell {
        &self.cells[cell]
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// World coordinate of the lower-left corner of cell `(0, 0)` on both axes.
    pub fn origin(&self) -> f64 {
        self.origin
    }

    /// Offset of the cell lattice relative to the world origin, in `[0, size)`.
    pub fn origin_offset(&self) -> f64 {
        let o = self.origin % self.cell_size;
        if o < 0.0 {
            o + self.cell_size
        } else {
            o
        }
    }

    pub fn in_swathe(&self, cell: Cell) -> bool {
        self.cells.get(cell.0, cell.1).is_some_and(|c| c.in_swathe)
    }

    pub fn swathe_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells
            .iter_cells()
            .filter(|(_, c)| c.in_swathe)
            .map(|(cell, _)| cell)
    }

    /// Cell containing `p` (floor convention), if inside the lattice.
    pub fn cell_at(&self, p: Point) -> Option<Cell> {
        let fx = libm::floor((p.x - self.origin) / self.cell_size);
        let fy = libm::floor((p.y - self.origin) / self.cell_size);
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let (i, j) = (fy as usize, fx as usize);
        self.cells.contains(i, j).then_some((i, j))
    }

    pub fn cell_center(&self, (i, j): Cell) -> Point {
        Point::new(
            self.origin + (j as f64 + 0.5) * self.cell_size,
            self.origin + (i as f64 + 0.5) * self.cell_size,
        )
    }

    pub fn cell_bounds(&self, (i, j): Cell) -> Aabb {
        let x0 = self.origin + j as f64 * self.cell_size;
        let y0 = self.origin + i as f64 * self.cell_size;
        Aabb::new(x0, y0, x0 + self.cell_size, y0 + self.cell_size)
    }
}

/// Two coarse grids over the same terrain; `grid_b` is shifted by a quarter
/// cell on both axes relative to `grid_a`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualGrid {
    robot_size: f64,
    extent: Aabb,
    grids: [CoarseGrid; 2],
}

impl DualGrid {
    /// Assembles a dual grid from parts. `extent` is the terrain rectangle.
    pub fn from_parts(robot_size: f64, extent: Aabb, grid_a: CoarseGrid, grid_b: CoarseGrid) -> Self {
        Self {
            robot_size,
            extent,
            grids: [grid_a, grid_b],
        }
    }

    pub fn robot_size(&self) -> f64 {
        self.robot_size
    }

    pub fn coarse_cell_size(&self) -> f64 {
        self.grids[0].cell_size
    }

    pub fn grid_a(&self) -> &CoarseGrid {
        &self.grids[0]
    }

    pub fn grid_b(&self) -> &CoarseGrid {
        &self.grids[1]
    }

    pub fn grids(&self) -> &[CoarseGrid; 2] {
        &self.grids
    }

    /// Terrain rectangle the grids were built over.
    pub fn extent(&self) -> Aabb {
        self.extent
    }

    pub fn contains_point(&self, p: Point) -> bool {
        self.extent.contains(p)
    }
}

/// Lays two coarse grids (cell side `4 × robot_size`, second grid offset by a
/// quarter cell) over the terrain. Each coarse cell takes the minimum rank of
/// every fine cell it overlaps and is in the swathe when any overlapped fine
/// cell is and its center lies on the map.
pub fn build_dual_grids(
    grid: &TerrainGrid,
    swathe: &Swathe,
    robot_size: f64,
) -> Result<DualGrid, CorridorError> {
    if !(robot_size > 0.0 && robot_size.is_finite()) {
        return Err(CorridorError::InvalidParameter("robot size must be positive"));
    }
    if swathe.is_empty() {
        return Err(CorridorError::EmptySwathe);
    }
    let size = 4.0 * robot_size;
    let grid_a = coarse_grid(grid, swathe, 0.0, size);
    // start one cell early so the shifted lattice still covers the origin
    let grid_b = coarse_grid(grid, swathe, size / 4.0 - size, size);
    let extent = Aabb::new(0.0, 0.0, grid.width_m(), grid.height_m());
    Ok(DualGrid::from_parts(robot_size, extent, grid_a, grid_b))
}

/// Index range of fine cells of side `fine` overlapping `[lo, hi)`, clamped to `n`.
fn covered_range(lo: f64, hi: f64, fine: f64, n: usize) -> core::ops::Range<usize> {
    let first = libm::floor(lo / fine + OVERLAP_EPS).max(0.0) as usize;
    let last = (libm::ceil(hi / fine - OVERLAP_EPS).max(0.0) as usize).min(n);
    first.min(last)..last
}

fn coarse_grid(terrain: &TerrainGrid, swathe: &Swathe, origin: f64, size: f64) -> CoarseGrid {
    let fine = terrain.cell_size();
    let cols = libm::ceil((terrain.width_m() - origin) / size - OVERLAP_EPS).max(1.0) as usize;
    let rows = libm::ceil((terrain.height_m() - origin) / size - OVERLAP_EPS).max(1.0) as usize;
    let cells = Grid::from_fn(rows, cols, |i, j| {
        let x0 = origin + j as f64 * size;
        let y0 = origin + i as f64 * size;
        let mut rank = u8::MAX;
        let mut in_swathe = false;
        for r in covered_range(y0, y0 + size, fine, terrain.rows()) {
            for c in covered_range(x0, x0 + size, fine, terrain.cols()) {
                rank = rank.min(terrain.rank((r, c)));
                in_swathe |= swathe.contains((r, c));
            }
        }
        // off-map centers never join the swathe
        let (cx, cy) = (x0 + size / 2.0, y0 + size / 2.0);
        let on_map = cx <= terrain.width_m() && cy <= terrain.height_m() && cx >= 0.0 && cy >= 0.0;
        CoarseCell {
            rank: if rank == u8::MAX { 2 } else { rank },
            in_swathe: in_swathe && on_map,
        }
    });
    CoarseGrid {
        origin,
        cell_size: size,
        cells,
    }
}

/// True when the coarse cell holding `p` is a nest member in either grid.
pub fn navigable_at(dual: &DualGrid, nests: &[NestMap; 2], p: Point) -> Result<bool, CorridorError> {
    if !dual.contains_point(p) {
        return Err(CorridorError::PointOutsideGrid(p));
    }
    Ok(dual
        .grids
        .iter()
        .zip(nests)
        .any(|(g, n)| g.cell_at(p).is_some_and(|cell| n.contains(cell))))
}

/// Cells of `grid` whose footprint overlaps `bounds` with positive area.
pub fn overlapping_cells(grid: &CoarseGrid, bounds: &Aabb) -> Vec<Cell> {
    let mut out = Vec::new();
    let lo_j = libm::floor((bounds.min_x - grid.origin) / grid.cell_size).max(0.0) as usize;
    let lo_i = libm::floor((bounds.min_y - grid.origin) / grid.cell_size).max(0.0) as usize;
    let hi_j = (libm::ceil((bounds.max_x - grid.origin) / grid.cell_size).max(0.0) as usize).min(grid.cols());
    let hi_i = (libm::ceil((bounds.max_y - grid.origin) / grid.cell_size).max(0.0) as usize).min(grid.rows());
    for i in lo_i..hi_i {
        for j in lo_j..hi_j {
            let b = grid.cell_bounds((i, j));
            let dx = b.max_x.min(bounds.max_x) - b.min_x.max(bounds.min_x);
            let dy = b.max_y.min(bounds.max_y) - b.min_y.max(bounds.min_y);
            if dx > OVERLAP_EPS * grid.cell_size && dy > OVERLAP_EPS * grid.cell_size {
                out.push((i, j));
            }
        }
    }
    out
}
