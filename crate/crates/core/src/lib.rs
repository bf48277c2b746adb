//! Two-level path planning for a ground robot over partially known terrain.
//!
//! The global level ranks terrain cells from height and soil data, lays two
//! offset coarse grids over a swathe around the start–goal line, and lets a
//! swarm of termite-like agents discover nests: connected regions that are
//! safe to drive. A waypoint path is then searched through the nests. The
//! local level steers around obstacles the map did not know about with a
//! vector field histogram and reacts to penetrometer soil readings.
//!
//! Everything here is `no_std` + `alloc`; file formats, rendering, and the
//! command-line tool live in the `termite-nav` crate.

#![no_std]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod corridor;
pub mod geometry;
pub mod global_planner;
pub mod grid;
pub mod local_planner;
pub mod sim;
pub mod swarm;
pub mod terrain;

pub use corridor::{build_dual_grids, build_swathe, navigable_at, CoarseGrid, DualGrid, Swathe};
pub use geometry::{Aabb, Point};
pub use global_planner::{plan_global, GlobalPath, PlannerParams};
pub use grid::{Cell, Grid};
pub use local_planner::{
    apply_soil_reading, build_polar, select_direction, update_histogram, HistogramGrid,
    PolarHistogram, SteeringCommand, VfhParams,
};
pub use swarm::{merge_nests, run_swarm, NestMap, SwarmParams};
pub use terrain::{build_terrain_grid, HeightMap, SoilCategory, TerrainGrid, TerrainParams};
