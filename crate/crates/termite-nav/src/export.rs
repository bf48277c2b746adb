//! CSV and JSON writers for every artifact the pipeline produces.

use serde::{Deserialize, Serialize};

use termite_nav_core::corridor::{CoarseGrid, DualGrid};
use termite_nav_core::geometry::Point;
use termite_nav_core::global_planner::GlobalPath;
use termite_nav_core::grid::Cell;
use termite_nav_core::sim::{Outcome, TraceLog};
use termite_nav_core::swarm::{NestId, NestMap, PelletField};
use termite_nav_core::terrain::TerrainGrid;

use crate::error::{Error, Result};

fn csv_bytes<F>(header: &[&str], fill: F) -> Vec<u8>
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    fill(&mut w).expect("in-memory write");
    w.into_inner().expect("in-memory flush")
}

fn json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(value).expect("plain data serializes");
    out.push(b'\n');
    out
}

/// `row,col,height,soil,gradGoodness,soilGoodness,rank`
pub fn terrain_csv(grid: &TerrainGrid) -> Vec<u8> {
    csv_bytes(
        &["row", "col", "height", "soil", "gradGoodness", "soilGoodness", "rank"],
        |w| {
            for ((r, c), cell) in grid.cells().iter_cells() {
                w.write_record([
                    r.to_string(),
                    c.to_string(),
                    cell.height.to_string(),
                    cell.soil.name().to_string(),
                    cell.gradient_goodness.to_string(),
                    cell.soil_goodness.to_string(),
                    cell.rank.to_string(),
                ])?;
            }
            Ok(())
        },
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoarseCellRecord {
    pub i: usize,
    pub j: usize,
    pub rank: u8,
    pub in_swathe: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct CoarseGridRecord {
    pub origin: f64,
    pub rows: usize,
    pub cols: usize,
    pub cells: Vec<CoarseCellRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DualGridRecord {
    pub robot_size: f64,
    pub coarse_cell_size: f64,
    pub offsets: [f64; 2],
    pub grid_a: CoarseGridRecord,
    pub grid_b: CoarseGridRecord,
}

fn coarse_record(grid: &CoarseGrid) -> CoarseGridRecord {
    CoarseGridRecord {
        origin: grid.origin(),
        rows: grid.rows(),
        cols: grid.cols(),
        cells: grid
            .cells()
            .iter_cells()
            .map(|((i, j), c)| CoarseCellRecord {
                i,
                j,
                rank: c.rank,
                in_swathe: c.in_swathe,
            })
            .collect(),
    }
}

pub fn dual_grid_record(dual: &DualGrid) -> DualGridRecord {
    DualGridRecord {
        robot_size: dual.robot_size(),
        coarse_cell_size: dual.coarse_cell_size(),
        offsets: [dual.grid_a().origin_offset(), dual.grid_b().origin_offset()],
        grid_a: coarse_record(dual.grid_a()),
        grid_b: coarse_record(dual.grid_b()),
    }
}

pub fn dual_grid_json(dual: &DualGrid) -> Vec<u8> {
    json_bytes(&dual_grid_record(dual))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestRecord {
    pub id: NestId,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NestMapRecord {
    pub threshold: u8,
    pub nests: Vec<NestRecord>,
}

pub fn nest_record(nests: &NestMap, threshold: u8) -> NestMapRecord {
    NestMapRecord {
        threshold,
        nests: nests
            .nests()
            .iter()
            .map(|(&id, cells)| NestRecord {
                id,
                cells: cells.iter().copied().collect(),
            })
            .collect(),
    }
}

/// `{threshold, nests: [{id, cells: [[i, j], ...]}]}`
pub fn nests_json(nests: &NestMap, threshold: u8) -> Vec<u8> {
    json_bytes(&nest_record(nests, threshold))
}

pub fn read_nests_json(bytes: &[u8]) -> Result<NestMapRecord> {
    serde_json::from_slice(bytes).map_err(|e| Error::malformed("nest JSON", e))
}

/// `i,j,pellets`, one row per cell.
pub fn pellets_csv(pellets: &PelletField) -> Vec<u8> {
    csv_bytes(&["i", "j", "pellets"], |w| {
        for ((i, j), n) in pellets.iter_cells() {
            w.write_record([i.to_string(), j.to_string(), n.to_string()])?;
        }
        Ok(())
    })
}

/// `index,x_m,y_m,grid,i,j`
pub fn path_csv(path: &GlobalPath) -> Vec<u8> {
    csv_bytes(&["index", "x_m", "y_m", "grid", "i", "j"], |w| {
        for (k, (p, node)) in path.waypoints.iter().zip(&path.nodes).enumerate() {
            w.write_record([
                k.to_string(),
                p.x.to_string(),
                p.y.to_string(),
                if node.grid == 0 { "A" } else { "B" }.to_string(),
                node.i.to_string(),
                node.j.to_string(),
            ])?;
        }
        Ok(())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub cost: f64,
    pub length: f64,
    pub waypoints: Vec<Point>,
}

/// `{cost, length, waypoints}`
pub fn path_json(path: &GlobalPath) -> Vec<u8> {
    json_bytes(&PathRecord {
        cost: path.cost,
        length: path.length,
        waypoints: path.waypoints.clone(),
    })
}

/// `tick,x,y,theta,v,omega,event`
pub fn trace_csv(trace: &TraceLog) -> Vec<u8> {
    csv_bytes(&["tick", "x", "y", "theta", "v", "omega", "event"], |w| {
        for r in &trace.rows {
            w.write_record([
                r.tick.to_string(),
                r.x.to_string(),
                r.y.to_string(),
                r.theta.to_string(),
                r.v.to_string(),
                r.omega.to_string(),
                r.event.as_str().to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `tick,heading,speed,flag`
pub fn steering_csv(trace: &TraceLog) -> Vec<u8> {
    csv_bytes(&["tick", "heading", "speed", "flag"], |w| {
        for r in &trace.rows {
            w.write_record([
                r.tick.to_string(),
                r.heading_cmd.to_string(),
                r.speed_cmd.to_string(),
                r.event.as_str().to_string(),
            ])?;
        }
        Ok(())
    })
}

/// `tick,sector,density`
pub fn polar_csv(log: &[(usize, Vec<f64>)]) -> Vec<u8> {
    csv_bytes(&["tick", "sector", "density"], |w| {
        for (tick, densities) in log {
            for (k, d) in densities.iter().enumerate() {
                w.write_record([tick.to_string(), k.to_string(), d.to_string()])?;
            }
        }
        Ok(())
    })
}

pub fn outcome_json(outcome: &Outcome) -> Vec<u8> {
    json_bytes(outcome)
}

/// Rows of a `tick,x,y,...` trace CSV as `(tick, x, y, event)`.
pub fn read_trace_csv(bytes: &[u8]) -> Result<Vec<(usize, f64, f64, String)>> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut out = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| Error::malformed("trace CSV", e))?;
        let field = |k: usize| r.get(k).ok_or_else(|| Error::malformed("trace CSV", "short row"));
        let num = |k: usize| -> Result<f64> {
            field(k)?.parse().map_err(|e| Error::malformed("trace CSV", e))
        };
        out.push((
            field(0)?.parse().map_err(|e| Error::malformed("trace CSV", e))?,
            num(1)?,
            num(2)?,
            field(6)?.to_string(),
        ));
    }
    Ok(out)
}

/// Rank column of a terrain CSV as a `rows × cols` raster.
pub fn read_terrain_ranks(bytes: &[u8]) -> Result<termite_nav_core::grid::Grid<u8>> {
    let mut reader = csv::Reader::from_reader(bytes);
    let mut cells = Vec::new();
    for record in reader.records() {
        let r = record.map_err(|e| Error::malformed("terrain CSV", e))?;
        let parse = |k: usize| -> Result<usize> {
            r.get(k)
                .ok_or_else(|| Error::malformed("terrain CSV", "short row"))?
                .parse()
                .map_err(|e| Error::malformed("terrain CSV", e))
        };
        cells.push((parse(0)?, parse(1)?, parse(6)? as u8));
    }
    let rows = cells.iter().map(|c| c.0 + 1).max().unwrap_or(0);
    let cols = cells.iter().map(|c| c.1 + 1).max().unwrap_or(0);
    if rows * cols != cells.len() || rows == 0 {
        return Err(Error::malformed("terrain CSV", "cells do not form a full grid"));
    }
    let mut grid = termite_nav_core::grid::Grid::filled(rows, cols, 0u8);
    for (r, c, rank) in cells {
        grid[(r, c)] = rank;
    }
    Ok(grid)
}
