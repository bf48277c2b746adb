//! Terrain ingestion and ranking.
//!
//! A grayscale heightmap is block-averaged into a coarser height grid. Each
//! cell then gets a gradient goodness from the worst height step to any of its
//! eight neighbours and a soil goodness from its soil category; the cell rank
//! is their sum, so ranks run from 2 (worst) to 10 (best).

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;

use crate::geometry::Point;
use crate::grid::{Cell, Grid};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TerrainError {
    EmptyImage,
    /// Height difference outside `[-255, 255]`.
    OutOfRange(i32),
    IndexOutOfBounds(Cell),
    UnknownCatValue(i64),
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },
    InvalidParameter(&'static str),
}

impl fmt::Display for TerrainError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptyImage => write!(f, "heightmap has no pixels"),
            Self::OutOfRange(d) => write!(f, "height difference {d} outside [-255, 255]"),
            Self::IndexOutOfBounds((r, c)) => write!(f, "cell ({r}, {c}) is out of bounds"),
            Self::UnknownCatValue(v) => write!(f, "cat value {v} has no soil category mapping"),
            Self::DimensionMismatch { expected, found } => write!(
                f,
                "soil raster is {}x{} but the height grid is {}x{}",
                found.0, found.1, expected.0, expected.1
            ),
            Self::InvalidParameter(what) => write!(f, "invalid parameter: {what}"),
        }
    }
}

impl core::error::Error for TerrainError {}

/// 8-bit grayscale heightmap, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeightMap {
    width: usize,
    height: usize,
    values: Vec<u8>,
}

impl HeightMap {
    pub fn new(width: usize, height: usize, values: Vec<u8>) -> Result<Self, TerrainError> {
        if width == 0 || height == 0 {
            return Err(TerrainError::EmptyImage);
        }
        if values.len() != width * height {
            return Err(TerrainError::DimensionMismatch {
                expected: (height, width),
                found: (values.len() / width, width),
            });
        }
        Ok(Self {
            width,
            height,
            values,
        })
    }

    pub fn constant(width: usize, height: usize, value: u8) -> Result<Self, TerrainError> {
        Self::new(width, height, alloc::vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[u8] {
        &self.values
    }

    pub fn pixel(&self, x: usize, y: usize) -> u8 {
        self.values[y * self.width + x]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum SoilCategory {
    Gravel,
    Sand,
    Clay,
    Silt,
    Rock,
}

impl SoilCategory {
    pub const ALL: [SoilCategory; 5] = [
        SoilCategory::Gravel,
        SoilCategory::Sand,
        SoilCategory::Clay,
        SoilCategory::Silt,
        SoilCategory::Rock,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::Gravel => "Gravel",
            Self::Sand => "Sand",
            Self::Clay => "Clay",
            Self::Silt => "Silt",
            Self::Rock => "Rock",
        }
    }

    /// Case-insensitive parse of a category name.
    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name().eq_ignore_ascii_case(name.trim()))
    }
}

impl fmt::Display for SoilCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Soil goodness per category. The default is the published table
/// (Gravel 5, Sand 4, Clay 3, Silt 3, Rock 1); `silt` can be overridden.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default))]
pub struct SoilGoodnessTable {
    pub gravel: u8,
    pub sand: u8,
    pub clay: u8,
    pub silt: u8,
    pub rock: u8,
}

impl Default for SoilGoodnessTable {
    fn default() -> Self {
        Self {
            gravel: 5,
            sand: 4,
            clay: 3,
            silt: 3,
            rock: 1,
        }
    }
}

impl SoilGoodnessTable {
    pub fn goodness(&self, cat: SoilCategory) -> u8 {
        match cat {
            SoilCategory::Gravel => self.gravel,
            SoilCategory::Sand => self.sand,
            SoilCategory::Clay => self.clay,
            SoilCategory::Silt => self.silt,
            SoilCategory::Rock => self.rock,
        }
    }

    fn validate(&self) -> Result<(), TerrainError> {
        let ok = SoilCategory::ALL
            .iter()
            .all(|&c| (1..=5).contains(&self.goodness(c)));
        if ok {
            Ok(())
        } else {
            Err(TerrainError::InvalidParameter("soil goodness values must lie in [1, 5]"))
        }
    }
}

/// Soil goodness under the default table.
pub fn soil_goodness(cat: SoilCategory) -> u8 {
    SoilGoodnessTable::default().goodness(cat)
}

/// Maps a signed height difference to a gradient goodness in `[1, 5]`.
///
/// Bands on `|diff|`: `0 → 5`, `1..=66 → 4`, `67..=129 → 3`, `130..=192 → 2`,
/// `193..=255 → 1`.
pub fn gradient_goodness(diff: i32) -> Result<u8, TerrainError> {
    match diff.unsigned_abs() {
        0 => Ok(5),
        1..=66 => Ok(4),
        67..=129 => Ok(3),
        130..=192 => Ok(2),
        193..=255 => Ok(1),
        _ => Err(TerrainError::OutOfRange(diff)),
    }
}

/// Block-averages a heightmap. Output cell `(r, c)` covers pixels
/// `x ∈ [c·block_w, (c+1)·block_w)`, `y ∈ [r·block_h, (r+1)·block_h)`;
/// edge blocks average whatever pixels exist. Means round half up.
pub fn subsample(hm: &HeightMap, block_w: usize, block_h: usize) -> Result<Grid<u8>, TerrainError> {
    if block_w == 0 || block_h == 0 {
        return Err(TerrainError::InvalidParameter("block size must be at least 1x1"));
    }
    if hm.values.is_empty() {
        return Err(TerrainError::EmptyImage);
    }
    let rows = hm.height.div_ceil(block_h);
    let cols = hm.width.div_ceil(block_w);
    Ok(Grid::from_fn(rows, cols, |r, c| {
        let ys = r * block_h..((r + 1) * block_h).min(hm.height);
        let xs = c * block_w..((c + 1) * block_w).min(hm.width);
        let n = (ys.len() * xs.len()) as u32;
        let sum: u32 = ys
            .flat_map(|y| xs.clone().map(move |x| (x, y)))
            .map(|(x, y)| u32::from(hm.pixel(x, y)))
            .sum();
        ((2 * sum + n) / (2 * n)) as u8
    }))
}

/// Worst (minimum) gradient goodness over the Moore neighbours of `cell`.
/// A cell without neighbours scores 5.
pub fn cell_gradient_goodness(heights: &Grid<u8>, cell: Cell) -> Result<u8, TerrainError> {
    let (r, c) = cell;
    if !heights.contains(r, c) {
        return Err(TerrainError::IndexOutOfBounds(cell));
    }
    let here = i32::from(heights[cell]);
    heights
        .moore_neighbors(r, c)
        .map(|n| gradient_goodness(i32::from(heights[n]) - here))
        .try_fold(5u8, |acc, g| g.map(|g| acc.min(g)))
}

/// Cat-value → soil category lookup.
pub type CatMapping = BTreeMap<i64, SoilCategory>;

/// Converts a raster of cat values into soil categories, checking it matches
/// the `(rows, cols)` of the height grid.
pub fn categorize_soil(
    cats: &Grid<i64>,
    mapping: &CatMapping,
    expected: (usize, usize),
) -> Result<Grid<SoilCategory>, TerrainError> {
    let found = (cats.rows(), cats.cols());
    if found != expected {
        return Err(TerrainError::DimensionMismatch { expected, found });
    }
    let mut out = Vec::with_capacity(cats.len());
    for &v in cats.as_slice() {
        out.push(*mapping.get(&v).ok_or(TerrainError::UnknownCatValue(v))?);
    }
    Ok(Grid::from_vec(found.0, found.1, out).expect("dimensions preserved"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct TerrainCell {
    pub height: u8,
    pub soil: SoilCategory,
    pub gradient_goodness: u8,
    pub soil_goodness: u8,
    pub rank: u8,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct TerrainParams {
    pub block_w: usize,
    pub block_h: usize,
    /// Side of one sub-sampled cell in meters.
    pub cell_size_m: f64,
    pub soil_goodness: SoilGoodnessTable,
}

impl Default for TerrainParams {
    fn default() -> Self {
        Self {
            block_w: 4,
            block_h: 2,
            cell_size_m: 1.0,
            soil_goodness: SoilGoodnessTable::default(),
        }
    }
}

/// Ranked terrain. Row index grows with world `y`, column index with `x`;
/// cell `(r, c)` covers `[c·s, (c+1)·s) × [r·s, (r+1)·s)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TerrainGrid {
    cells: Grid<TerrainCell>,
    cell_size: f64,
}

impl TerrainGrid {
    /// Assembles a grid from already-ranked cells.
    pub fn from_cells(cells: Grid<TerrainCell>, cell_size: f64) -> Result<Self, TerrainError> {
        if cells.is_empty() {
            return Err(TerrainError::EmptyImage);
        }
        if !(cell_size > 0.0 && cell_size.is_finite()) {
            return Err(TerrainError::InvalidParameter("cell size must be positive"));
        }
        Ok(Self { cells, cell_size })
    }

    pub fn rows(&self) -> usize {
        self.cells.rows()
    }

    pub fn cols(&self) -> usize {
        self.cells.cols()
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn width_m(&self) -> f64 {
        self.cols() as f64 * self.cell_size
    }

    pub fn height_m(&self) -> f64 {
        self.rows() as f64 * self.cell_size
    }

    pub fn cells(&self) -> &Grid<TerrainCell> {
        &self.cells
    }

    pub fn cell(&self, cell: Cell) -> &TerrainCell {
        &self.cells[cell]
    }

    pub fn rank(&self, cell: Cell) -> u8 {
        self.cells[cell].rank
    }

    pub fn contains_point(&self, p: Point) -> bool {
        p.x >= 0.0 && p.y >= 0.0 && p.x < self.width_m() && p.y < self.height_m()
    }

    /// Cell containing `p` by floor; a point on a shared edge belongs to the
    /// cell whose lower edge it is.
    /// Points on the far boundary are clamped into the last cell.
    pub fn cell_at(&self, p: Point) -> Option<Cell> {
        if !(p.x >= 0.0 && p.y >= 0.0 && p.x <= self.width_m() && p.y <= self.height_m()) {
            return None;
        }
        let c = ((p.x / self.cell_size) as usize).min(self.cols() - 1);
        let r = ((p.y / self.cell_size) as usize).min(self.rows() - 1);
        Some((r, c))
    }

    pub fn cell_center(&self, (r, c): Cell) -> Point {
        Point::new(
            (c as f64 + 0.5) * self.cell_size,
            (r as f64 + 0.5) * self.cell_size,
        )
    }

    /// Forces a cell to the minimum rank (2) by giving it goodness 1 on both
    /// axes. Used to stamp known obstacles into the map.
    pub fn mark_impassable(&mut self, cell: Cell) {
        let c = &mut self.cells[cell];
        c.gradient_goodness = 1;
        c.soil_goodness = 1;
        c.rank = 2;
    }
}

/// Sub-samples `hm`, attaches `soil`, and ranks every cell.
pub fn build_terrain_grid(
    hm: &HeightMap,
    soil: &Grid<SoilCategory>,
    params: &TerrainParams,
) -> Result<TerrainGrid, TerrainError> {
    params.soil_goodness.validate()?;
    let heights = subsample(hm, params.block_w, params.block_h)?;
    let expected = (heights.rows(), heights.cols());
    let found = (soil.rows(), soil.cols());
    if expected != found {
        return Err(TerrainError::DimensionMismatch { expected, found });
    }
    let mut cells = Vec::with_capacity(heights.len());
    for (cell, &height) in heights.iter_cells() {
        let gradient_goodness = cell_gradient_goodness(&heights, cell)?;
        let soil_cat = soil[cell];
        let soil_goodness = params.soil_goodness.goodness(soil_cat);
        cells.push(TerrainCell {
            height,
            soil: soil_cat,
            gradient_goodness,
            soil_goodness,
            rank: gradient_goodness + soil_goodness,
        });
    }
    let cells = Grid::from_vec(expected.0, expected.1, cells).expect("dimensions preserved");
    TerrainGrid::from_cells(cells, params.cell_size_m)
}
