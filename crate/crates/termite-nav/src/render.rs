//! Raster renderings of the rank map, grids, nests and paths.
//!
//! Images share the terrain's orientation: pixel row grows with world `y`.

use termite_nav_core::corridor::{CoarseGrid, DualGrid, Swathe};
use termite_nav_core::geometry::{Aabb, Point};
use termite_nav_core::global_planner::GlobalPath;
use termite_nav_core::grid::Grid;
use termite_nav_core::sim::{Crate, TraceLog};
use termite_nav_core::swarm::NestMap;
use termite_nav_core::terrain::{SoilCategory, TerrainGrid};

use crate::pnm::{encode_pgm, Rgb};

pub const GRID_A: [u8; 3] = [220, 40, 40];
pub const GRID_B: [u8; 3] = [40, 90, 230];
pub const PATH: [u8; 3] = [30, 180, 60];
pub const TRAJECTORY: [u8; 3] = [250, 200, 0];
pub const HIDDEN_CRATE: [u8; 3] = [240, 120, 20];
pub const KNOWN_CRATE: [u8; 3] = [60, 60, 60];
pub const HIDDEN_SOIL: [u8; 3] = [170, 120, 90];

/// Rank 2 maps to 0 and rank 10 to 255, linearly, rounded half up.
pub fn rank_gray(rank: u8) -> u8 {
    let r = u32::from(rank.clamp(2, 10) - 2);
    ((r * 255 * 2 + 8) / 16) as u8
}

/// One pixel per fine cell.
pub fn rank_pgm(terrain: &TerrainGrid) -> Vec<u8> {
    let values: Vec<u8> = terrain.cells().as_slice().iter().map(|c| rank_gray(c.rank)).collect();
    encode_pgm(terrain.cols(), terrain.rows(), &values)
}

/// Maps world coordinates to pixels at `scale` pixels per fine cell.
#[derive(Debug, Clone, Copy)]
pub struct Canvas {
    pub cell_size: f64,
    pub scale: usize,
}

impl Canvas {
    pub fn px(&self, v: f64) -> f64 {
        v / self.cell_size * self.scale as f64
    }

    pub fn pixel(&self, p: Point) -> (i64, i64) {
        (self.px(p.x).floor() as i64, self.px(p.y).floor() as i64)
    }
}

/// Gray rank backdrop, `scale × scale` pixels per fine cell.
pub fn rank_backdrop(terrain: &TerrainGrid, scale: usize) -> (Rgb, Canvas) {
    let mut img = Rgb::filled(terrain.cols() * scale, terrain.rows() * scale, [0; 3]);
    for ((r, c), cell) in terrain.cells().iter_cells() {
        let g = rank_gray(cell.rank);
        for dy in 0..scale {
            for dx in 0..scale {
                img.put((c * scale + dx) as i64, (r * scale + dy) as i64, [g, g, g]);
            }
        }
    }
    (
        img,
        Canvas {
            cell_size: terrain.cell_size(),
            scale,
        },
    )
}

pub fn draw_segment(img: &mut Rgb, canvas: &Canvas, a: Point, b: Point, color: [u8; 3]) {
    let len_px = canvas.px(a.distance(b));
    let steps = (len_px * 2.0).ceil().max(1.0) as usize;
    for k in 0..=steps {
        let t = k as f64 / steps as f64;
        let p = Point::new(a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t);
        let (x, y) = canvas.pixel(p);
        img.put(x, y, color);
    }
}

pub fn draw_box(img: &mut Rgb, canvas: &Canvas, b: &Aabb, color: [u8; 3], filled: bool) {
    let (x0, y0) = canvas.pixel(Point::new(b.min_x, b.min_y));
    let (x1, y1) = canvas.pixel(Point::new(b.max_x, b.max_y));
    for y in y0..=y1 {
        for x in x0..=x1 {
            if filled || x == x0 || x == x1 || y == y0 || y == y1 {
                img.put(x, y, color);
            }
        }
    }
}

fn draw_marker(img: &mut Rgb, canvas: &Canvas, p: Point, color: [u8; 3]) {
    let (x, y) = canvas.pixel(p);
    for d in -3..=3 {
        img.put(x + d, y, color);
        img.put(x, y + d, color);
    }
}

fn draw_grid_lines(img: &mut Rgb, canvas: &Canvas, grid: &CoarseGrid, color: [u8; 3]) {
    for cell in grid.swathe_cells() {
        draw_box(img, canvas, &grid.cell_bounds(cell), color, false);
    }
}

/// Swathe tint with both coarse grids outlined.
pub fn render_dual_grid(terrain: &TerrainGrid, swathe: &Swathe, dual: &DualGrid, scale: usize) -> Rgb {
    let (mut img, canvas) = rank_backdrop(terrain, scale);
    for ((r, c), &inside) in swathe.members().iter_cells() {
        if !inside {
            continue;
        }
        for dy in 0..scale {
            for dx in 0..scale {
                let (x, y) = (c * scale + dx, r * scale + dy);
                let [g, _, _] = img.get(x, y);
                img.put(x as i64, y as i64, [g / 2, g / 2 + 64, g / 2 + 64]);
            }
        }
    }
    draw_grid_lines(&mut img, &canvas, dual.grid_a(), GRID_A);
    draw_grid_lines(&mut img, &canvas, dual.grid_b(), GRID_B);
    img
}

/// Outlines each nest along the edges where it meets a non-member cell.
pub fn draw_nest_outlines(img: &mut Rgb, canvas: &Canvas, grid: &CoarseGrid, nests: &NestMap, color: [u8; 3]) {
    for (&id, cells) in nests.nests() {
        for &(i, j) in cells {
            let b = grid.cell_bounds((i, j));
            let same = |di: i64, dj: i64| {
                let (ni, nj) = (i as i64 + di, j as i64 + dj);
                ni >= 0 && nj >= 0 && nests.nest_of((ni as usize, nj as usize)) == Some(id)
            };
            let corners = [
                Point::new(b.min_x, b.min_y),
                Point::new(b.max_x, b.min_y),
                Point::new(b.max_x, b.max_y),
                Point::new(b.min_x, b.max_y),
            ];
            // row index i grows with y, column j with x
            let edges = [
                (!same(-1, 0), corners[0], corners[1]),
                (!same(0, 1), corners[1], corners[2]),
                (!same(1, 0), corners[3], corners[2]),
                (!same(0, -1), corners[0], corners[3]),
            ];
            for (open, a, b) in edges {
                if open {
                    draw_segment(img, canvas, a, b, color);
                }
            }
        }
    }
}

pub fn render_nests(terrain: &TerrainGrid, dual: &DualGrid, nests: &[NestMap; 2], scale: usize) -> Rgb {
    let (mut img, canvas) = rank_backdrop(terrain, scale);
    draw_nest_outlines(&mut img, &canvas, dual.grid_a(), &nests[0], GRID_A);
    draw_nest_outlines(&mut img, &canvas, dual.grid_b(), &nests[1], GRID_B);
    img
}

/// Global path solid, executed trajectory dotted, crates boxed. Cells whose
/// true soil differs from the database are filled in.
#[allow(clippy::too_many_arguments)]
pub fn render_path(
    terrain: &TerrainGrid,
    truth: Option<&Grid<SoilCategory>>,
    crates: &[Crate],
    path: Option<&GlobalPath>,
    trajectory: &[Point],
    start: Point,
    goal: Point,
    scale: usize,
) -> Rgb {
    let (mut img, canvas) = rank_backdrop(terrain, scale);
    if let Some(truth) = truth {
        for ((r, c), &cat) in truth.iter_cells() {
            if cat != terrain.cell((r, c)).soil {
                for dy in 0..scale {
                    for dx in 0..scale {
                        img.put((c * scale + dx) as i64, (r * scale + dy) as i64, HIDDEN_SOIL);
                    }
                }
            }
        }
    }
    for c in crates {
        if c.known_to_planner {
            draw_box(&mut img, &canvas, &c.bounds, KNOWN_CRATE, true);
        } else {
            draw_box(&mut img, &canvas, &c.bounds, HIDDEN_CRATE, false);
        }
    }
    if let Some(path) = path {
        for w in path.waypoints.windows(2) {
            draw_segment(&mut img, &canvas, w[0], w[1], PATH);
        }
    }
    // dots spaced about three pixels apart
    let mut since_dot = f64::INFINITY;
    let mut prev: Option<Point> = None;
    for &p in trajectory {
        since_dot += prev.map_or(0.0, |q| canvas.px(q.distance(p)));
        if since_dot >= 3.0 {
            let (x, y) = canvas.pixel(p);
            img.put(x, y, TRAJECTORY);
            since_dot = 0.0;
        }
        prev = Some(p);
    }
    draw_marker(&mut img, &canvas, start, PATH);
    draw_marker(&mut img, &canvas, goal, GRID_A);
    img
}

/// Robot positions, one per tick.
pub fn trajectory(trace: &TraceLog) -> Vec<Point> {
    trace.ticks().map(|r| Point::new(r.x, r.y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_gray_endpoints() {
        assert_eq!(rank_gray(2), 0);
        assert_eq!(rank_gray(10), 255);
        assert_eq!(rank_gray(6), 128);
        let grays: Vec<u8> = (2..=10).map(rank_gray).collect();
        assert!(grays.windows(2).all(|w| w[0] < w[1]));
    }
}
