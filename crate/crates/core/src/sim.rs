//! Deterministic planar simulation of the full planning loop.
//!
//! A differential-drive robot with a planar laser fan drives over ranked
//! terrain. Crates may be hidden from the global planner; the ground-truth
//! soil may differ from the soil the planner was given. Each tick the robot
//! scans, updates its histogram, probes the soil ahead, replans when the
//! nests shrink, and steers with the vector field histogram.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use crate::corridor::{build_dual_grids, build_swathe, CorridorError, DualGrid, Swathe};
use crate::geometry::{angle_diff, wrap_to_pi, Aabb, Point};
use crate::global_planner::{plan_global, replan_from, GlobalPath, PlanError, PlannerParams};
use crate::grid::Grid;
use crate::local_planner::{
    apply_soil_reading, build_polar, select_direction, update_histogram, HistogramGrid, NavState,
    PenetrometerReading, RangeScan, SoilVetoParams, SteeringCommand, VfhError, VfhParams,
};
use crate::swarm::{run_dual_swarm, NestMap, SwarmError, SwarmParams, SwarmRun};
use crate::terrain::{build_terrain_grid, HeightMap, SoilCategory, TerrainError, TerrainGrid, TerrainParams};

/// Largest distance the robot may cover in one tick.
pub const MAX_STEP_M: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub enum SimError {
    InvalidScenario(&'static str),
    Terrain(TerrainError),
    Corridor(CorridorError),
    Swarm(SwarmError),
    Plan(PlanError),
    Vfh(VfhError),
    PointOutsideGrid(Point),
}

impl fmt::Display for SimError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::InvalidScenario(what) => write!(f, "invalid scenario: {what}"),
            Self::Terrain(e) => write!(f, "terrain: {e}"),
            Self::Corridor(e) => write!(f, "corridor: {e}"),
            Self::Swarm(e) => write!(f, "swarm: {e}"),
            Self::Plan(e) => write!(f, "global planner: {e}"),
            Self::Vfh(e) => write!(f, "local planner: {e}"),
            Self::PointOutsideGrid(p) => write!(f, "point ({}, {}) lies outside the terrain", p.x, p.y),
        }
    }
}

impl core::error::Error for SimError {
    fn source(&self) -> Option<&(dyn core::error::Error + 'static)> {
        match self {
            Self::Terrain(e) => Some(e),
            Self::Corridor(e) => Some(e),
            Self::Swarm(e) => Some(e),
            Self::Plan(e) => Some(e),
            Self::Vfh(e) => Some(e),
            _ => None,
        }
    }
}

macro_rules! from_error {
    ($($variant:ident($ty:ty)),*) => {
        $(impl From<$ty> for SimError {
            fn from(e: $ty) -> Self {
                Self::$variant(e)
            }
        })*
    };
}

from_error!(
    Terrain(TerrainError),
    Corridor(CorridorError),
    Swarm(SwarmError),
    Plan(PlanError),
    Vfh(VfhError)
);

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct RobotParams {
    /// Footprint diameter, meters.
    pub size: f64,
    pub v_max: f64,
    pub omega_max: f64,
    /// Proportional gain of the heading controller.
    pub k_theta: f64,
}

impl Default for RobotParams {
    fn default() -> Self {
        Self {
            size: 0.5,
            v_max: 0.5,
            omega_max: 1.5,
            k_theta: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RobotState {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
}

impl RobotState {
    pub fn at(p: Point, theta: f64) -> Self {
        Self {
            x: p.x,
            y: p.y,
            theta,
            ..Default::default()
        }
    }

    pub fn position(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct SensorParams {
    pub fov: f64,
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for SensorParams {
    fn default() -> Self {
        Self {
            fov: PI,
            n_rays: 181,
            max_range: 8.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct Crate {
    pub bounds: Aabb,
    #[cfg_attr(feature = "serde", serde(default))]
    pub known_to_planner: bool,
}

impl Crate {
    pub fn hidden(bounds: Aabb) -> Self {
        Self {
            bounds,
            known_to_planner: false,
        }
    }

    pub fn known(bounds: Aabb) -> Self {
        Self {
            bounds,
            known_to_planner: true,
        }
    }
}

/// Loop-level settings that are not owned by one of the planners.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct SimParams {
    pub dt: f64,
    pub max_steps: usize,
    /// Swathe half-width in coarse cells.
    pub swathe_half_width_cells: f64,
    /// A waypoint counts as reached within this many coarse cells.
    pub waypoint_radius_cells: f64,
    /// How far ahead of the robot center the penetrometer probes, meters.
    pub probe_lead: f64,
    /// Heading errors above this (radians) make the robot turn in place.
    pub turn_in_place: f64,
    /// Ticks on cells with gradient goodness below this count as violations.
    pub grade_goodness_min: u8,
    /// Gap kept between the footprint and sensed obstacles; the histogram
    /// enlarges obstacles by the robot radius plus this margin.
    pub safety_margin: f64,
    /// Keep every tick's smoothed polar histogram in the run.
    pub record_polar: bool,
}

impl Default for SimParams {
    fn default() -> Self {
        Self {
            dt: 0.1,
            max_steps: 5000,
            swathe_half_width_cells: 8.0,
            waypoint_radius_cells: 1.0,
            probe_lead: 1.5,
            turn_in_place: PI / 3.0,
            grade_goodness_min: 5,
            safety_margin: 0.2,
            record_polar: false,
        }
    }
}

/// Everything needed to run one experiment. Rasters are already loaded.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub heightmap: HeightMap,
    /// Soil known to the global planner.
    pub soil: Grid<SoilCategory>,
    /// Soil the penetrometer actually finds; defaults to `soil`.
    pub ground_truth_soil: Option<Grid<SoilCategory>>,
    pub terrain: TerrainParams,
    pub start: Point,
    pub goal: Point,
    pub goal_tolerance: f64,
    pub crates: Vec<Crate>,
    pub robot: RobotParams,
    pub sensor: SensorParams,
    pub swarm: SwarmParams,
    pub vfh: VfhParams,
    pub soil_veto: SoilVetoParams,
    pub planner: PlannerParams,
    pub sim: SimParams,
}

impl Scenario {
    /// A scenario with default parameters over the given rasters.
    pub fn new(heightmap: HeightMap, soil: Grid<SoilCategory>, start: Point, goal: Point) -> Self {
        Self {
            heightmap,
            soil,
            ground_truth_soil: None,
            terrain: TerrainParams::default(),
            start,
            goal,
            goal_tolerance: 0.5,
            crates: Vec::new(),
            robot: RobotParams::default(),
            sensor: SensorParams::default(),
            swarm: SwarmParams::default(),
            vfh: VfhParams::default(),
            soil_veto: SoilVetoParams::default(),
            planner: PlannerParams::default(),
            sim: SimParams::default(),
        }
    }

    fn validate(&self, terrain: &TerrainGrid) -> Result<(), SimError> {
        use SimError::InvalidScenario as Invalid;
        if self.start == self.goal {
            return Err(Invalid("start and goal coincide"));
        }
        for p in [self.start, self.goal] {
            if !terrain.contains_point(p) {
                return Err(SimError::PointOutsideGrid(p));
            }
        }
        if self.sensor.n_rays < 2 {
            return Err(Invalid("sensor needs at least two rays"));
        }
        if !(self.sensor.max_range > 0.0 && self.sensor.fov > 0.0) {
            return Err(Invalid("sensor range and field of view must be positive"));
        }
        if !(self.sim.dt > 0.0) || self.sim.max_steps == 0 {
            return Err(Invalid("dt and maxSteps must be positive"));
        }
        if !(self.robot.size > 0.0 && self.robot.v_max > 0.0 && self.robot.omega_max > 0.0) {
            return Err(Invalid("robot size and limits must be positive"));
        }
        if self.robot.v_max.max(self.vfh.v_max) * self.sim.dt > MAX_STEP_M + 1e-12 {
            return Err(Invalid("vMax·dt exceeds 0.05 m per tick"));
        }
        if !(self.sim.safety_margin >= 0.0) {
            return Err(Invalid("safety margin must be non-negative"));
        }
        if !(self.goal_tolerance > 0.0) {
            return Err(Invalid("goal tolerance must be positive"));
        }
        let extent = Aabb::new(0.0, 0.0, terrain.width_m(), terrain.height_m());
        let radius = self.robot.size / 2.0;
        for c in &self.crates {
            let b = c.bounds;
            if b.min_x < extent.min_x || b.min_y < extent.min_y || b.max_x > extent.max_x || b.max_y > extent.max_y {
                return Err(Invalid("crate lies outside the terrain"));
            }
            if b.intersects_disk(self.start, radius) {
                return Err(Invalid("robot starts inside a crate"));
            }
        }
        if let Some(gt) = &self.ground_truth_soil {
            if (gt.rows(), gt.cols()) != (terrain.rows(), terrain.cols()) {
                return Err(Invalid("ground-truth soil does not match the terrain grid"));
            }
        }
        self.vfh.validate()?;
        self.swarm.validate()?;
        Ok(())
    }
}

/// Evenly spaced ray fan; distances stop at the nearest crate face or the
/// arena edge, capped at `max_range`. Known crates are sensed like any other.
pub fn raycast(pose: &RobotState, sensor: &SensorParams, crates: &[Crate], bounds: &Aabb) -> RangeScan {
    let origin = pose.position();
    let n = sensor.n_rays.max(2);
    let mut bearings = Vec::with_capacity(n);
    let mut ranges = Vec::with_capacity(n);
    for k in 0..n {
        let bearing = -sensor.fov / 2.0 + sensor.fov * k as f64 / (n - 1) as f64;
        let heading = pose.theta + bearing;
        let mut range = sensor.max_range.min(exit_distance(bounds, origin, heading));
        for c in crates {
            if let Some(t) = c.bounds.ray_entry(origin, heading) {
                range = range.min(t);
            }
        }
        bearings.push(bearing);
        ranges.push(range);
    }
    RangeScan {
        bearings,
        ranges,
        max_range: sensor.max_range,
    }
}

/// Distance from an interior point to the boundary of `bounds` along a ray.
fn exit_distance(bounds: &Aabb, origin: Point, heading: f64) -> f64 {
    let (dx, dy) = (libm::cos(heading), libm::sin(heading));
    let mut t = f64::INFINITY;
    if dx > 1e-12 {
        t = t.min((bounds.max_x - origin.x) / dx);
    } else if dx < -1e-12 {
        t = t.min((bounds.min_x - origin.x) / dx);
    }
    if dy > 1e-12 {
        t = t.min((bounds.max_y - origin.y) / dy);
    } else if dy < -1e-12 {
        t = t.min((bounds.min_y - origin.y) / dy);
    }
    t.max(0.0)
}

/// Unicycle update with a proportional heading controller.
pub fn step_kinematics(state: &RobotState, cmd: &SteeringCommand, dt: f64, robot: &RobotParams) -> RobotState {
    let error = wrap_to_pi(cmd.heading - state.theta);
    let omega = (robot.k_theta * error).clamp(-robot.omega_max, robot.omega_max);
    let v = cmd.speed.clamp(0.0, robot.v_max);
    RobotState {
        x: state.x + v * libm::cos(state.theta) * dt,
        y: state.y + v * libm::sin(state.theta) * dt,
        theta: wrap_to_pi(state.theta + omega * dt),
        v,
        omega,
    }
}

/// Soil raster aligned with the terrain grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SoilRaster {
    pub categories: Grid<SoilCategory>,
    pub cell_size: f64,
}

impl SoilRaster {
    /// Category of the cell containing `p`; edges fall into the lower index.
    pub fn category_at(&self, p: Point) -> Option<SoilCategory> {
        if !(p.x >= 0.0 && p.y >= 0.0) {
            return None;
        }
        let c = libm::floor(p.x / self.cell_size) as usize;
        let r = libm::floor(p.y / self.cell_size) as usize;
        self.categories.get(r, c).copied()
    }
}

/// Reads the ground-truth soil under `p`.
pub fn penetrometer_sample(ground_truth: &SoilRaster, p: Point) -> Result<PenetrometerReading, SimError> {
    ground_truth
        .category_at(p)
        .map(|category| PenetrometerReading { position: p, category })
        .ok_or(SimError::PointOutsideGrid(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub enum TraceEvent {
    None,
    Replan,
    SoilVeto,
    Waypoint,
    Goal,
    Collision,
    Stuck,
}

impl TraceEvent {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::None => "none",
            Self::Replan => "replan",
            Self::SoilVeto => "soilVeto",
            Self::Waypoint => "waypoint",
            Self::Goal => "goal",
            Self::Collision => "collision",
            Self::Stuck => "stuck",
        }
    }
}

/// State and command for one tick. A tick with several events yields one row
/// per event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub tick: usize,
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub v: f64,
    pub omega: f64,
    pub heading_cmd: f64,
    pub speed_cmd: f64,
    pub event: TraceEvent,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TraceLog {
    pub rows: Vec<TraceRow>,
}

impl TraceLog {
    pub fn count(&self, event: TraceEvent) -> usize {
        self.rows.iter().filter(|r| r.event == event).count()
    }

    /// One row per tick, in order.
    pub fn ticks(&self) -> impl Iterator<Item = &TraceRow> + '_ {
        let mut last = None;
        self.rows.iter().filter(move |r| {
            let fresh = last != Some(r.tick);
            last = Some(r.tick);
            fresh
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub enum Termination {
    Reached,
    Collided,
    Stuck,
    OutOfBounds,
    MaxSteps,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "camelCase"))]
pub struct Outcome {
    pub reached: bool,
    pub collided: bool,
    pub steps: usize,
    pub path_length: f64,
    /// Smallest gap between the footprint and any crate or arena edge.
    pub min_clearance: f64,
    pub replans: usize,
    pub soil_violations: usize,
    pub grade_violations: usize,
    pub termination: Termination,
}

/// The planning products computed before the robot moves.
#[derive(Debug, Clone)]
pub struct World {
    pub terrain: TerrainGrid,
    pub swathe: Swathe,
    pub dual: DualGrid,
    pub swarm: [SwarmRun; 2],
}

impl World {
    pub fn nests(&self) -> [NestMap; 2] {
        [self.swarm[0].nests.clone(), self.swarm[1].nests.clone()]
    }
}

/// Ranks the terrain (with known crates stamped in as rank 2) and builds the
/// swathe and dual grids. Returns the world without nests.
pub fn prepare_corridor(s: &Scenario) -> Result<(TerrainGrid, Swathe, DualGrid), SimError> {
    let mut terrain = build_terrain_grid(&s.heightmap, &s.soil, &s.terrain)?;
    s.validate(&terrain)?;
    stamp_known_crates(&mut terrain, &s.crates);
    let coarse = 4.0 * s.robot.size;
    let swathe = build_swathe(&terrain, s.start, s.goal, s.sim.swathe_half_width_cells * coarse)?;
    let dual = build_dual_grids(&terrain, &swathe, s.robot.size)?;
    Ok((terrain, swathe, dual))
}

/// [`prepare_corridor`] followed by the swarm on both grids.
pub fn prepare_world(s: &Scenario) -> Result<World, SimError> {
    let (terrain, swathe, dual) = prepare_corridor(s)?;
    let swarm = run_dual_swarm(dual.grids(), &s.swarm)?;
    Ok(World {
        terrain,
        swathe,
        dual,
        swarm,
    })
}

/// Marks every fine cell overlapping a known crate as impassable.
pub fn stamp_known_crates(terrain: &mut TerrainGrid, crates: &[Crate]) {
    let s = terrain.cell_size();
    for c in crates.iter().filter(|c| c.known_to_planner) {
        let cells: Vec<_> = terrain
            .cells()
            .iter_cells()
            .map(|(cell, _)| cell)
            .filter(|&(r, col)| {
                let fine = Aabb::new(col as f64 * s, r as f64 * s, (col + 1) as f64 * s, (r + 1) as f64 * s);
                fine.overlaps(&c.bounds)
            })
            .collect();
        for cell in cells {
            terrain.mark_impassable(cell);
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub outcome: Outcome,
    pub trace: TraceLog,
    pub world: World,
    pub initial_path: GlobalPath,
    /// Global path in force when the run ended.
    pub final_path: GlobalPath,
    /// Nest state after every soil veto was applied.
    pub final_nav: NavState,
    /// Nest snapshots taken at each replan, oldest first.
    pub replan_nests: Vec<[NestMap; 2]>,
    /// Smoothed polar densities per tick, when recording was requested.
    pub polar_log: Vec<(usize, Vec<f64>)>,
}

/// Runs the full closed loop. Errors are returned only for invalid scenarios
/// and for an initial global plan that cannot be made.
pub fn run_scenario(s: &Scenario) -> Result<SimRun, SimError> {
    run_world(s, prepare_world(s)?)
}

/// Runs the closed loop over a world already prepared for `s`.
pub fn run_world(s: &Scenario, world: World) -> Result<SimRun, SimError> {
    let initial_path = plan_global(&world.dual, &world.nests(), s.start, s.goal, &s.planner)?;
    let ground_truth = SoilRaster {
        categories: s
            .ground_truth_soil
            .clone()
            .unwrap_or_else(|| s.soil.clone()),
        cell_size: world.terrain.cell_size(),
    };
    let extent = world.dual.extent();
    let coarse = world.dual.coarse_cell_size();
    let radius = s.robot.size / 2.0;
    let waypoint_radius = s.sim.waypoint_radius_cells * coarse;
    let vfh = VfhParams {
        enlarge_radius: radius + s.sim.safety_margin,
        ..s.vfh
    };

    let mut nav = NavState {
        dual: world.dual.clone(),
        nests: world.nests(),
    };
    let mut path = initial_path.clone();
    let mut targets = route_targets(&path, s.goal);
    let mut target_idx = 0;
    let mut state = RobotState::at(s.start, s.start.bearing_to(s.goal));
    let mut histogram = HistogramGrid::new(&vfh, s.start);
    let mut trace = TraceLog::default();
    let mut replan_nests = Vec::new();
    let mut blocked_last_tick = false;
    let mut polar_log = Vec::new();

    let mut outcome = Outcome {
        reached: false,
        collided: false,
        steps: 0,
        path_length: 0.0,
        min_clearance: clearance(&state.position(), radius, &s.crates, &extent),
        replans: 0,
        soil_violations: 0,
        grade_violations: 0,
        termination: Termination::MaxSteps,
    };

    for tick in 1..=s.sim.max_steps {
        let mut events: Vec<TraceEvent> = Vec::new();
        let mut terminate = None;
        let pose = state.position();

        let scan = raycast(&state, &s.sensor, &s.crates, &extent);
        update_histogram(&mut histogram, pose, state.theta, &scan);

        let probe = pose.offset(state.theta, s.sim.probe_lead);
        let mut vetoed_now = false;
        if let Ok(reading) = penetrometer_sample(&ground_truth, probe) {
            let veto = apply_soil_reading(&reading, &mut nav, &mut histogram, &s.soil_veto)?;
            if veto.vetoed && (veto.removed > 0 || veto.histogram_changed) {
                events.push(TraceEvent::SoilVeto);
                vetoed_now = true;
            }
            if veto.replan {
                events.push(TraceEvent::Replan);
                outcome.replans += 1;
                replan_nests.push(nav.nests.clone());
                match replan_from(&nav.dual, &nav.nests, pose, s.goal, &s.planner) {
                    Ok(p) => {
                        path = p;
                        targets = route_targets(&path, s.goal);
                        target_idx = 0;
                    }
                    Err(_) => terminate = Some(Termination::Stuck),
                }
            }
        }

        while target_idx + 1 < targets.len() && pose.distance(targets[target_idx]) <= waypoint_radius {
            target_idx += 1;
            events.push(TraceEvent::Waypoint);
        }
        let target_dir = pose.bearing_to(targets[target_idx]);

        let polar = build_polar(&histogram, pose, &vfh);
        if s.sim.record_polar {
            polar_log.push((tick, polar.densities().to_vec()));
        }
        let mut cmd = match select_direction(&polar, target_dir, vfh.threshold, &vfh) {
            Ok(cmd) => {
                blocked_last_tick = false;
                cmd
            }
            Err(VfhError::NoFreeSector) => {
                if blocked_last_tick {
                    terminate = Some(Termination::Stuck);
                } else {
                    blocked_last_tick = true;
                    events.push(TraceEvent::Replan);
                    outcome.replans += 1;
                    replan_nests.push(nav.nests.clone());
                    match replan_from(&nav.dual, &nav.nests, pose, s.goal, &s.planner) {
                        Ok(p) => {
                            path = p;
                            targets = route_targets(&path, s.goal);
                            target_idx = 0;
                        }
                        Err(_) => terminate = Some(Termination::Stuck),
                    }
                }
                SteeringCommand::stop(state.theta)
            }
            Err(e) => return Err(e.into()),
        };
        if vetoed_now || angle_diff(cmd.heading, state.theta) > s.sim.turn_in_place {
            cmd.speed = 0.0;
        }
        if terminate == Some(Termination::Stuck) {
            cmd = SteeringCommand::stop(state.theta);
        }

        state = step_kinematics(&state, &cmd, s.sim.dt, &s.robot);
        outcome.steps = tick;
        outcome.path_length += state.v.abs() * s.sim.dt;
        let pose = state.position();
        outcome.min_clearance = outcome
            .min_clearance
            .min(clearance(&pose, radius, &s.crates, &extent));

        if let Some(cell) = world.terrain.cell_at(pose) {
            if s.soil_veto.goodness.goodness(ground_truth.categories[cell]) <= s.soil_veto.block_threshold {
                outcome.soil_violations += 1;
            }
            if world.terrain.cell(cell).gradient_goodness < s.sim.grade_goodness_min {
                outcome.grade_violations += 1;
            }
        }

        if terminate.is_none() {
            if s.crates.iter().any(|c| c.bounds.intersects_disk(pose, radius)) {
                terminate = Some(Termination::Collided);
            } else if pose.distance(s.goal) <= s.goal_tolerance {
                terminate = Some(Termination::Reached);
            } else if !extent.contains(pose) {
                terminate = Some(Termination::OutOfBounds);
            }
        }
        match terminate {
            Some(Termination::Collided) => events.push(TraceEvent::Collision),
            Some(Termination::Reached) => events.push(TraceEvent::Goal),
            Some(Termination::Stuck) => events.push(TraceEvent::Stuck),
            _ => {}
        }
        if events.is_empty() {
            events.push(TraceEvent::None);
        }
        for event in events {
            trace.rows.push(TraceRow {
                tick,
                x: state.x,
                y: state.y,
                theta: state.theta,
                v: state.v,
                omega: state.omega,
                heading_cmd: cmd.heading,
                speed_cmd: cmd.speed,
                event,
            });
        }
        if let Some(t) = terminate {
            outcome.termination = t;
            break;
        }
    }
    outcome.reached = outcome.termination == Termination::Reached;
    outcome.collided = outcome.termination == Termination::Collided;

    Ok(SimRun {
        outcome,
        trace,
        world,
        initial_path,
        final_path: path,
        final_nav: nav,
        replan_nests,
        polar_log,
    })
}

fn route_targets(path: &GlobalPath, goal: Point) -> Vec<Point> {
    let mut targets = path.waypoints.clone();
    targets.push(goal);
    targets
}

fn clearance(p: &Point, radius: f64, crates: &[Crate], extent: &Aabb) -> f64 {
    let walls = (p.x - extent.min_x)
        .min(p.y - extent.min_y)
        .min(extent.max_x - p.x)
        .min(extent.max_y - p.y);
    crates
        .iter()
        .map(|c| c.bounds.distance_to(*p))
        .fold(walls, f64::min)
        - radius
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn open_arena_rays_hit_max_range() {
        let pose = RobotState::at(Point::new(50.0, 50.0), 0.3);
        let scan = raycast(&pose, &SensorParams::default(), &[], &Aabb::new(0.0, 0.0, 100.0, 100.0));
        assert_eq!(scan.ranges.len(), 181);
        assert!(scan.ranges.iter().all(|&r| r == 8.0));
        assert!((scan.bearings[0] + PI / 2.0).abs() < 1e-12);
        assert!((scan.bearings[180] - PI / 2.0).abs() < 1e-12);
        assert!(scan.bearings[90].abs() < 1e-12);
    }

    #[test]
    fn box_ahead_is_seen_at_near_face() {
        let pose = RobotState::at(Point::new(10.0, 10.0), 0.0);
        let crates = [Crate::hidden(Aabb::centered(Point::new(13.0, 10.0), 1.0, 1.0))];
        let scan = raycast(&pose, &SensorParams::default(), &crates, &Aabb::new(0.0, 0.0, 40.0, 40.0));
        assert!((scan.ranges[90] - 2.5).abs() < 1e-9);
        // the ±90° rays run parallel to the box and miss it
        assert_eq!(scan.ranges[0], 8.0);
        assert_eq!(scan.ranges[180], 8.0);
        // known crates are still physical
        let known = [Crate::known(crates[0].bounds)];
        let scan2 = raycast(&pose, &SensorParams::default(), &known, &Aabb::new(0.0, 0.0, 40.0, 40.0));
        assert_eq!(scan.ranges, scan2.ranges);
    }

    #[test]
    fn arena_edge_limits_range() {
        let pose = RobotState::at(Point::new(2.0, 5.0), PI);
        let scan = raycast(&pose, &SensorParams::default(), &[], &Aabb::new(0.0, 0.0, 10.0, 10.0));
        assert!((scan.ranges[90] - 2.0).abs() < 1e-9);
    }

    #[test]
    fn straight_advance() {
        let robot = RobotParams::default();
        let s = RobotState::at(Point::new(1.0, 2.0), 0.7);
        let next = step_kinematics(&s, &SteeringCommand { heading: 0.7, speed: 0.3 }, 1.0, &robot);
        assert!((next.position().distance(s.position()) - 0.3).abs() < 1e-12);
        assert_eq!(next.theta, 0.7);
        assert_eq!(next.omega, 0.0);
    }

    #[test]
    fn zero_speed_turns_in_place() {
        let robot = RobotParams::default();
        let mut s = RobotState::at(Point::new(1.0, 2.0), 0.0);
        let cmd = SteeringCommand::stop(1.0);
        let mut prev_err = 1.0;
        for _ in 0..100 {
            s = step_kinematics(&s, &cmd, 0.1, &robot);
            let err = angle_diff(cmd.heading, s.theta);
            assert!(err <= prev_err);
            prev_err = err;
            assert_eq!(s.position(), Point::new(1.0, 2.0));
        }
        assert!(prev_err < 1e-6);
    }

    #[test]
    fn heading_response_matches_first_order_solution() {
        // inside the unsaturated band the error decays as e_{k+1} = (1 − kθ·dt)·e_k
        let robot = RobotParams::default();
        let dt = 0.01;
        let e0 = 0.5; // kθ·e0 = 1.0 < omega_max
        let mut s = RobotState::at(Point::new(0.0, 0.0), 0.0);
        let cmd = SteeringCommand::stop(e0);
        for k in 1..=200 {
            s = step_kinematics(&s, &cmd, dt, &robot);
            let expected = e0 * (1.0 - robot.k_theta * dt).powi(k);
            assert!((wrap_to_pi(cmd.heading - s.theta) - expected).abs() < 1e-12);
            // and stays within 1% of the continuous-time exp(−kθ t) decay
            let continuous = e0 * libm::exp(-robot.k_theta * dt * k as f64);
            assert!((expected - continuous).abs() < 0.01 * e0);
        }
    }

    #[test]
    fn penetrometer_reads_ground_truth() {
        let mut cats = Grid::filled(4, 4, SoilCategory::Gravel);
        cats[(1, 2)] = SoilCategory::Rock;
        let raster = SoilRaster {
            categories: cats,
            cell_size: 1.0,
        };
        assert_eq!(
            penetrometer_sample(&raster, Point::new(2.5, 1.5)).unwrap().category,
            SoilCategory::Rock
        );
        // x = 2.0 sits on the edge between columns 1 and 2; floor picks 2
        assert_eq!(
            penetrometer_sample(&raster, Point::new(2.0, 1.0)).unwrap().category,
            SoilCategory::Rock
        );
        assert_eq!(
            penetrometer_sample(&raster, Point::new(1.999, 1.0)).unwrap().category,
            SoilCategory::Gravel
        );
        assert!(penetrometer_sample(&raster, Point::new(5.0, 1.0)).is_err());
    }
}
