//! Multi-threaded drivers: the two swarms of a dual grid side by side, and
//! independent scenarios across a worker pool.

use std::thread;

use rayon::prelude::*;

use termite_nav_core::corridor::CoarseGrid;
use termite_nav_core::sim::{prepare_corridor, run_world, Scenario, SimError, SimRun, World};
use termite_nav_core::swarm::{params_for_grid, run_swarm, SwarmError, SwarmParams, SwarmRun};

use crate::error::{Error, Result};

/// Same result as the sequential dual run, one thread per grid.
pub fn run_dual_swarm_parallel(grids: &[CoarseGrid; 2], params: &SwarmParams) -> Result<[SwarmRun; 2], SwarmError> {
    let (a, b) = thread::scope(|s| {
        let b = s.spawn(|| run_swarm(&grids[1], &params_for_grid(params, 1)));
        let a = run_swarm(&grids[0], &params_for_grid(params, 0));
        (a, b.join().expect("swarm thread panicked"))
    });
    Ok([a?, b?])
}

pub fn prepare_world_parallel(s: &Scenario) -> Result<World, SimError> {
    let (terrain, swathe, dual) = prepare_corridor(s)?;
    let swarm = run_dual_swarm_parallel(dual.grids(), &s.swarm)?;
    Ok(World {
        terrain,
        swathe,
        dual,
        swarm,
    })
}

/// [`termite_nav_core::sim::run_scenario`] with the swarm phase threaded.
pub fn run_scenario_parallel(s: &Scenario) -> Result<SimRun, SimError> {
    run_world(s, prepare_world_parallel(s)?)
}

/// Runs each scenario in isolation on `jobs` workers; results keep input order.
pub fn run_batch(scenarios: &[Scenario], jobs: usize) -> Result<Vec<Result<SimRun, SimError>>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Usage(format!("cannot start {jobs} workers: {e}")))?;
    Ok(pool.install(|| scenarios.par_iter().map(run_scenario_parallel).collect()))
}
