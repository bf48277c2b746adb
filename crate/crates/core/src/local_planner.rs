//! Vector field histogram steering and penetrometer soil vetoes.
//!
//! Range returns accumulate in a robot-centred certainty grid. Each tick the
//! grid is collapsed into a polar obstacle density per angular sector, and the
//! robot steers into the run of low-density sectors nearest the target
//! direction. Penetrometer readings of unacceptable soil strip the affected
//! coarse cells from the nests and paint the surrounding histogram cells as
//! fully occupied.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::TAU;
use core::fmt;

use crate::corridor::DualGrid;
use crate::geometry::{angle_diff, wrap_to_pi, wrap_to_two_pi, Point};
use crate::grid::Grid;
use crate::swarm::{merge_nests, NestMap};
use crate::terrain::{SoilCategory, SoilGoodnessTable};

/// Angular distances closer than this are treated as ties.
const ANGLE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum VfhError {
    /// No run of at least `s_min` sectors is below the threshold.
    NoFreeSector,
    PointOutsideGrid(Point),
    InvalidParameter(&'static str),
}

impl fmt::Display for VfhError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::NoFreeSector => write!(f, "no sufficiently wide free valley"),
            Self::PointOutsideGrid(p) => write!(f, "point ({}, {}) lies outside the terrain", p.x, p.y),
            Self::InvalidParameter(what) => write!(f, "invalid VFH parameter: {what}"),
        }
    }
}

impl core::error::Error for VfhError {}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct VfhParams {
    /// Histogram cell side, meters.
    pub cell_size: f64,
    /// Half-width of the active window, meters.
    pub half_width: f64,
    pub c_max: u8,
    pub n_sectors: usize,
    /// Narrowest usable valley, in sectors.
    pub s_min: usize,
    /// Moving-average window over sectors (odd).
    pub smoothing: usize,
    /// Polar density below which a sector is free.
    pub threshold: f64,
    pub v_max: f64,
    pub v_min: f64,
    /// Each occupied cell also fills every sector within `asin(r/d)` of its
    /// bearing. Zero disables enlargement.
    pub enlarge_radius: f64,
}

impl Default for VfhParams {
    fn default() -> Self {
        Self {
            cell_size: 0.1,
            half_width: 5.0,
            c_max: 15,
            n_sectors: 72,
            s_min: 3,
            smoothing: 5,
            threshold: 200.0,
            v_max: 0.5,
            v_min: 0.05,
            enlarge_radius: 0.0,
        }
    }
}

impl VfhParams {
    pub fn validate(&self) -> Result<(), VfhError> {
        if !(self.cell_size > 0.0 && self.half_width > self.cell_size) {
            return Err(VfhError::InvalidParameter("window must span more than one cell"));
        }
        if self.n_sectors < 3 || self.s_min == 0 || self.s_min > self.n_sectors {
            return Err(VfhError::InvalidParameter("sector counts out of range"));
        }
        if self.smoothing == 0 || self.smoothing.is_multiple_of(2) || self.smoothing > self.n_sectors {
            return Err(VfhError::InvalidParameter("smoothing window must be odd"));
        }
        if !(self.threshold > 0.0) {
            return Err(VfhError::InvalidParameter("threshold must be positive"));
        }
        if !(self.enlarge_radius >= 0.0) {
            return Err(VfhError::InvalidParameter("enlargement radius must be non-negative"));
        }
        if !(self.v_max > 0.0 && self.v_min >= 0.0 && self.v_min <= self.v_max) {
            return Err(VfhError::InvalidParameter("speed limits out of order"));
        }
        Ok(())
    }
}

/// One planar range sweep. Bearings are in the sensor frame.
#[derive(Debug, Clone, PartialEq)]
pub struct RangeScan {
    pub bearings: Vec<f64>,
    pub ranges: Vec<f64>,
    pub max_range: f64,
}

/// Certainty grid in a square window that follows the robot. Cells are
/// addressed by absolute lattice index `(floor(x / h), floor(y / h))`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistogramGrid {
    cell_size: f64,
    c_max: u8,
    /// Absolute index of window cell `(0, 0)` as `(ix, iy)`.
    origin: (i64, i64),
    /// Row = y offset, column = x offset.
    cells: Grid<u8>,
}

impl HistogramGrid {
    pub fn new(params: &VfhParams, center: Point) -> Self {
        let side = libm::round(2.0 * params.half_width / params.cell_size) as usize;
        let mut grid = Self {
            cell_size: params.cell_size,
            c_max: params.c_max,
            origin: (0, 0),
            cells: Grid::filled(side, side, 0),
        };
        grid.origin = grid.origin_for(center);
        grid
    }

    pub fn side(&self) -> usize {
        self.cells.rows()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn c_max(&self) -> u8 {
        self.c_max
    }

    fn origin_for(&self, center: Point) -> (i64, i64) {
        let half = (self.side() / 2) as i64;
        let (ix, iy) = self.lattice_index(center);
        (ix - half, iy - half)
    }

    pub fn lattice_index(&self, p: Point) -> (i64, i64) {
        (
            libm::floor(p.x / self.cell_size) as i64,
            libm::floor(p.y / self.cell_size) as i64,
        )
    }

    pub fn lattice_center(&self, (ix, iy): (i64, i64)) -> Point {
        Point::new(
            (ix as f64 + 0.5) * self.cell_size,
            (iy as f64 + 0.5) * self.cell_size,
        )
    }

    fn local(&self, (ix, iy): (i64, i64)) -> Option<(usize, usize)> {
        let (dx, dy) = (ix - self.origin.0, iy - self.origin.1);
        let side = self.side() as i64;
        (dx >= 0 && dy >= 0 && dx < side && dy < side).then_some((dy as usize, dx as usize))
    }

    /// Certainty of the lattice cell, zero outside the window.
    pub fn certainty(&self, index: (i64, i64)) -> u8 {
        self.local(index).map_or(0, |cell| self.cells[cell])
    }

    pub fn certainty_at(&self, p: Point) -> u8 {
        self.certainty(self.lattice_index(p))
    }

    /// Adds one hit, saturating at `c_max`. Returns false outside the window.
    pub fn increment(&mut self, index: (i64, i64)) -> bool {
        match self.local(index) {
            Some(cell) => {
                let c = &mut self.cells[cell];
                *c = c.saturating_add(1).min(self.c_max);
                true
            }
            None => false,
        }
    }

    /// Moves the window so it is centred on `center`; cells that fall out of
    /// the window are forgotten.
    pub fn recenter(&mut self, center: Point) {
        let origin = self.origin_for(center);
        if origin == self.origin {
            return;
        }
        let side = self.side();
        let mut moved = Grid::filled(side, side, 0u8);
        for ((r, c), &v) in self.cells.iter_cells() {
            if v == 0 {
                continue;
            }
            let abs = (self.origin.0 + c as i64, self.origin.1 + r as i64);
            let (dx, dy) = (abs.0 - origin.0, abs.1 - origin.1);
            if dx >= 0 && dy >= 0 && (dx as usize) < side && (dy as usize) < side {
                moved[(dy as usize, dx as usize)] = v;
            }
        }
        self.cells = moved;
        self.origin = origin;
    }

    /// Sets every window cell whose center is within `radius` of `center`
    /// to `c_max`. Returns whether any cell changed.
    pub fn saturate_disk(&mut self, center: Point, radius: f64) -> bool {
        let mut changed = false;
        let lo = self.lattice_index(Point::new(center.x - radius, center.y - radius));
        let hi = self.lattice_index(Point::new(center.x + radius, center.y + radius));
        for iy in lo.1..=hi.1 {
            for ix in lo.0..=hi.0 {
                if self.lattice_center((ix, iy)).distance(center) > radius {
                    continue;
                }
                if let Some(cell) = self.local((ix, iy)) {
                    if self.cells[cell] != self.c_max {
                        self.cells[cell] = self.c_max;
                        changed = true;
                    }
                }
            }
        }
        changed
    }

    /// Non-zero cells as `(lattice index, certainty)`.
    pub fn occupied(&self) -> impl Iterator<Item = ((i64, i64), u8)> + '_ {
        self.cells
            .iter_cells()
            .filter(|(_, &v)| v > 0)
            .map(move |((r, c), &v)| ((self.origin.0 + c as i64, self.origin.1 + r as i64), v))
    }

    pub fn total_certainty(&self) -> u64 {
        self.cells.as_slice().iter().map(|&v| u64::from(v)).sum()
    }
}

/// Recentres the window on the robot and registers every return shorter than
/// the sensor's maximum range.
pub fn update_histogram(grid: &mut HistogramGrid, pose: Point, heading: f64, scan: &RangeScan) {
    grid.recenter(pose);
    for (&bearing, &range) in scan.bearings.iter().zip(&scan.ranges) {
        if range >= scan.max_range || !(range >= 0.0) {
            continue;
        }
        let hit = pose.offset(heading + bearing, range);
        grid.increment(grid.lattice_index(hit));
    }
}

/// Polar obstacle density, one value per sector. Sector `k` covers bearings
/// `[k·w, (k+1)·w)` with `w = 2π / n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarHistogram {
    densities: Vec<f64>,
}

impl PolarHistogram {
    pub fn from_densities(densities: Vec<f64>) -> Self {
        Self { densities }
    }

    pub fn zeros(n_sectors: usize) -> Self {
        Self {
            densities: vec![0.0; n_sectors],
        }
    }

    pub fn densities(&self) -> &[f64] {
        &self.densities
    }

    pub fn n_sectors(&self) -> usize {
        self.densities.len()
    }

    pub fn sector_width(&self) -> f64 {
        TAU / self.n_sectors() as f64
    }

    pub fn sector_of(&self, angle: f64) -> usize {
        let n = self.n_sectors();
        let k = libm::floor(wrap_to_two_pi(angle) / TAU * n as f64) as usize;
        k.min(n - 1)
    }

    pub fn sector_center(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.sector_width()
    }

    /// Circular moving average over `window` sectors.
    pub fn smoothed(&self, window: usize) -> PolarHistogram {
        let n = self.n_sectors();
        let half = window / 2;
        let densities = (0..n)
            .map(|k| {
                let sum: f64 = (0..window)
                    .map(|i| self.densities[(k + n + i - half) % n])
                    .sum();
                sum / window as f64
            })
            .collect();
        PolarHistogram { densities }
    }
}

/// Unsmoothed polar density: each cell within `half_width` adds
/// `c²·(1 − d / half_width)` to the sector holding its bearing.
pub fn build_polar_raw(grid: &HistogramGrid, pose: Point, params: &VfhParams) -> PolarHistogram {
    let mut polar = PolarHistogram::zeros(params.n_sectors);
    for (index, c) in grid.occupied() {
        let center = grid.lattice_center(index);
        let d = center.distance(pose);
        if d > params.half_width {
            continue;
        }
        let c = f64::from(c);
        let magnitude = c * c * (1.0 - d / params.half_width);
        let bearing = pose.bearing_to(center);
        let own = polar.sector_of(bearing);
        if params.enlarge_radius > 0.0 {
            let gamma = if d <= params.enlarge_radius {
                core::f64::consts::FRAC_PI_2
            } else {
                libm::asin(params.enlarge_radius / d)
            };
            for k in 0..params.n_sectors {
                if k == own || angle_diff(polar.sector_center(k), bearing) <= gamma {
                    polar.densities[k] += magnitude;
                }
            }
        } else {
            polar.densities[own] += magnitude;
        }
    }
    polar
}

pub fn build_polar(grid: &HistogramGrid, pose: Point, params: &VfhParams) -> PolarHistogram {
    build_polar_raw(grid, pose, params).smoothed(params.smoothing)
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SteeringCommand {
    /// World-frame heading, radians.
    pub heading: f64,
    pub speed: f64,
}

impl SteeringCommand {
    pub fn stop(heading: f64) -> Self {
        Self {
            heading,
            speed: 0.0,
        }
    }
}

/// A maximal circular run of free sectors: `len` sectors starting at `start`
/// and continuing counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Valley {
    pub start: usize,
    pub len: usize,
}

impl Valley {
    pub fn contains(&self, k: usize, n: usize) -> bool {
        (k + n - self.start) % n < self.len
    }

    pub fn end(&self, n: usize) -> usize {
        (self.start + self.len - 1) % n
    }
}

/// Maximal runs of sectors with density below `threshold`.
pub fn free_valleys(polar: &PolarHistogram, threshold: f64) -> Vec<Valley> {
    let n = polar.n_sectors();
    let free: Vec<bool> = polar.densities.iter().map(|&h| h < threshold).collect();
    let Some(blocked) = free.iter().position(|&f| !f) else {
        return vec![Valley { start: 0, len: n }];
    };
    let mut valleys = Vec::new();
    let mut k = 0;
    // walk once around the circle starting just after a blocked sector
    while k < n {
        let s = (blocked + 1 + k) % n;
        if free[s] {
            let mut len = 0;
            while k < n && free[(blocked + 1 + k) % n] {
                len += 1;
                k += 1;
            }
            valleys.push(Valley { start: s, len });
        } else {
            k += 1;
        }
    }
    valleys
}

/// Chooses a heading inside the free valley nearest `target_dir`.
///
/// When the target sector is inside a usable valley the heading is the
/// target itself. Otherwise it is the center of the valley's edge sector
/// nearest the target, moved `s_min / 2` sectors into the valley. Equally
/// near valleys on both sides resolve counterclockwise.
pub fn select_direction(
    polar: &PolarHistogram,
    target_dir: f64,
    threshold: f64,
    params: &VfhParams,
) -> Result<SteeringCommand, VfhError> {
    if !(threshold > 0.0) {
        return Err(VfhError::InvalidParameter("threshold must be positive"));
    }
    let n = polar.n_sectors();
    let target_sector = polar.sector_of(target_dir);
    let shift = params.s_min / 2;

    // (distance, clockwise?, heading)
    let mut best: Option<(f64, bool, f64)> = None;
    for valley in free_valleys(polar, threshold) {
        if valley.len < params.s_min {
            continue;
        }
        let candidate = if valley.contains(target_sector, n) {
            (0.0, false, target_dir)
        } else {
            let ccw_edge = valley.start;
            let cw_edge = valley.end(n);
            let d_ccw = angle_diff(polar.sector_center(ccw_edge), target_dir);
            let d_cw = angle_diff(polar.sector_center(cw_edge), target_dir);
            if d_ccw <= d_cw {
                let k = (ccw_edge + shift) % n;
                (d_ccw, wrap_to_pi(polar.sector_center(ccw_edge) - target_dir) < 0.0, polar.sector_center(k))
            } else {
                let k = (cw_edge + n - shift % n) % n;
                (d_cw, wrap_to_pi(polar.sector_center(cw_edge) - target_dir) < 0.0, polar.sector_center(k))
            }
        };
        let better = match best {
            None => true,
            Some((d, cw, _)) => {
                candidate.0 < d - ANGLE_EPS
                    || (libm::fabs(candidate.0 - d) <= ANGLE_EPS && cw && !candidate.1)
            }
        };
        if better {
            best = Some(candidate);
        }
    }
    let (_, _, heading) = best.ok_or(VfhError::NoFreeSector)?;
    let density = polar.densities[polar.sector_of(heading)];
    let speed = (params.v_max * (1.0 - (density / threshold).min(1.0))).max(params.v_min);
    Ok(SteeringCommand { heading, speed })
}

/// One penetrometer probe.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct PenetrometerReading {
    pub position: Point,
    pub category: SoilCategory,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct SoilVetoParams {
    /// Readings with goodness at or below this veto the ground.
    pub block_threshold: u8,
    /// Radius of the histogram patch painted around a vetoed reading, in
    /// coarse cells.
    pub radius_cells: f64,
    pub goodness: SoilGoodnessTable,
}

impl Default for SoilVetoParams {
    fn default() -> Self {
        Self {
            block_threshold: 1,
            radius_cells: 0.5,
            goodness: SoilGoodnessTable::default(),
        }
    }
}

/// Navigation state the local planner may shrink: the dual grid and the nests
/// of both grids.
#[derive(Debug, Clone, PartialEq)]
pub struct NavState {
    pub dual: DualGrid,
    pub nests: [NestMap; 2],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SoilVeto {
    /// The reading was bad enough to veto.
    pub vetoed: bool,
    /// Nest cells removed across both grids.
    pub removed: usize,
    pub histogram_changed: bool,
    /// Nests changed, so the global path must be recomputed.
    pub replan: bool,
}

/// Applies a penetrometer reading. Bad soil removes the coarse cell holding
/// the reading from the nests of both grids and saturates the histogram
/// around it. Reapplying the same reading is a no-op.
pub fn apply_soil_reading(
    reading: &PenetrometerReading,
    nav: &mut NavState,
    histogram: &mut HistogramGrid,
    params: &SoilVetoParams,
) -> Result<SoilVeto, VfhError> {
    if !nav.dual.contains_point(reading.position) {
        return Err(VfhError::PointOutsideGrid(reading.position));
    }
    if params.goodness.goodness(reading.category) > params.block_threshold {
        return Ok(SoilVeto::default());
    }
    let mut removed = 0;
    for (grid, nests) in nav.dual.grids().iter().zip(nav.nests.iter_mut()) {
        if let Some(cell) = grid.cell_at(reading.position) {
            if nests.remove_cell(cell) {
                removed += 1;
            }
        }
    }
    if removed > 0 {
        for nests in nav.nests.iter_mut() {
            *nests = merge_nests(nests);
        }
    }
    let radius = params.radius_cells * nav.dual.coarse_cell_size();
    let histogram_changed = histogram.saturate_disk(reading.position, radius);
    Ok(SoilVeto {
        vetoed: true,
        removed,
        histogram_changed,
        replan: removed > 0,
    })
}
