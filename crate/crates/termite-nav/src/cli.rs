//! `termite-nav rank|swarm|plan|simulate|render`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use termite_nav_core::geometry::Point;
use termite_nav_core::global_planner::plan_global;
use termite_nav_core::sim::{Scenario, SimRun, World};
use termite_nav_core::terrain::build_terrain_grid;

use crate::config::{load_inputs, load_scenario, params_with, CatMappingSource, Params};
use crate::error::{Error, Result};
use crate::export;
use crate::pnm::encode_ppm;
use crate::render;
use crate::runner::{prepare_world_parallel, run_batch, run_scenario_parallel};

#[derive(Debug, Parser)]
#[command(name = "termite-nav", version, about = "Swarm-based global planning and VFH local steering for a ground robot")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Swarm seed; overrides `swarm.seed`.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Parameter override such as `swarm.rankThreshold=8`; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    pub sets: Vec<String>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rank the terrain; writes terrain.csv and rank.pgm.
    Rank(RasterArgs),
    /// Run the swarm on both coarse grids; writes nests, pellets and an overlay.
    Swarm(RouteArgs),
    /// Swarm, then plan a global path; writes path.csv and path.json too.
    Plan(RouteArgs),
    /// Run scenarios; exit 0 only when every robot reaches its goal.
    Simulate {
        #[arg(required = true)]
        scenarios: Vec<PathBuf>,
        /// Scenarios run in parallel.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Render every figure for a scenario.
    Render {
        scenario: PathBuf,
        /// Pixels per fine cell.
        #[arg(long, default_value_t = 4)]
        scale: usize,
    },
}

#[derive(Debug, Args)]
pub struct RasterArgs {
    /// 8-bit binary PGM heightmap.
    #[arg(long)]
    pub heightmap: PathBuf,
    /// CSV of integer cat values.
    #[arg(long)]
    pub soil: PathBuf,
    /// JSON object mapping cat values to soil categories.
    #[arg(long)]
    pub catmap: PathBuf,
}

#[derive(Debug, Args)]
pub struct RouteArgs {
    #[command(flatten)]
    pub rasters: RasterArgs,
    /// Start point `x,y` in meters.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub start: Point,
    /// Goal point `x,y` in meters.
    #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
    pub goal: Point,
}

fn parse_point(s: &str) -> std::result::Result<Point, String> {
    let (x, y) = s.split_once(',').ok_or("expected x,y")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("{v:?}: {e}"));
    Ok(Point::new(num(x)?, num(y)?))
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("termite-nav: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    run_from(std::env::args_os())
}

pub fn run(cli: &Cli) -> Result<i32> {
    match &cli.command {
        Command::Rank(a) => cmd_rank(cli, a),
        Command::Swarm(a) => cmd_swarm(cli, a, false),
        Command::Plan(a) => cmd_swarm(cli, a, true),
        Command::Simulate { scenarios, jobs } => cmd_simulate(cli, scenarios, *jobs),
        Command::Render { scenario, scale } => cmd_render(cli, scenario, *scale),
    }
}

fn write(dir: &Path, name: &str, bytes: &[u8]) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(path, e))
}

fn route_scenario(params: &Params, a: &RouteArgs) -> Result<Scenario> {
    let r = &a.rasters;
    let inputs = load_inputs(
        &r.heightmap,
        &r.soil,
        &CatMappingSource::Path(r.catmap.clone()),
        &params.terrain,
        Path::new(""),
    )?;
    Ok(Scenario {
        heightmap: inputs.heightmap,
        soil: inputs.soil,
        ground_truth_soil: None,
        terrain: params.terrain,
        start: a.start,
        goal: a.goal,
        goal_tolerance: 0.5,
        crates: Vec::new(),
        robot: params.robot,
        sensor: params.sensor,
        swarm: params.swarm,
        vfh: params.vfh,
        soil_veto: params.soil_veto,
        planner: params.planner,
        sim: params.sim,
    })
}

fn cmd_rank(cli: &Cli, a: &RasterArgs) -> Result<i32> {
    let params = params_with(&cli.sets, cli.seed)?;
    let inputs = load_inputs(
        &a.heightmap,
        &a.soil,
        &CatMappingSource::Path(a.catmap.clone()),
        &params.terrain,
        Path::new(""),
    )?;
    let terrain = build_terrain_grid(&inputs.heightmap, &inputs.soil, &params.terrain)?;
    write(&cli.out, "terrain.csv", &export::terrain_csv(&terrain))?;
    write(&cli.out, "rank.pgm", &render::rank_pgm(&terrain))?;
    println!("ranked {}x{} cells", terrain.rows(), terrain.cols());
    Ok(0)
}

fn write_world(out: &Path, world: &World, threshold: u8, scale: usize) -> Result<()> {
    write(out, "dual_grid.json", &export::dual_grid_json(&world.dual))?;
    for (run, tag) in world.swarm.iter().zip(["a", "b"]) {
        write(out, &format!("nests_{tag}.json"), &export::nests_json(&run.nests, threshold))?;
        write(out, &format!("pellets_{tag}.csv"), &export::pellets_csv(&run.pellets))?;
    }
    let overlay = render::render_nests(&world.terrain, &world.dual, &world.nests(), scale);
    write(out, "nests.ppm", &encode_ppm(&overlay))
}

fn cmd_swarm(cli: &Cli, a: &RouteArgs, plan: bool) -> Result<i32> {
    let params = params_with(&cli.sets, cli.seed)?;
    let scenario = route_scenario(&params, a)?;
    let world = prepare_world_parallel(&scenario)?;
    write_world(&cli.out, &world, params.swarm.rank_threshold, 4)?;
    println!(
        "nests: grid A {}, grid B {}",
        world.swarm[0].nests.len(),
        world.swarm[1].nests.len()
    );
    if plan {
        let path = plan_global(&world.dual, &world.nests(), a.start, a.goal, &params.planner)?;
        write(&cli.out, "path.csv", &export::path_csv(&path))?;
        write(&cli.out, "path.json", &export::path_json(&path))?;
        println!("path: {} waypoints, length {:.3} m, cost {:.3}", path.waypoints.len(), path.length, path.cost);
    }
    Ok(0)
}

fn write_run(out: &Path, s: &Scenario, run: &SimRun) -> Result<()> {
    write(out, "trace.csv", &export::trace_csv(&run.trace))?;
    write(out, "steering.csv", &export::steering_csv(&run.trace))?;
    write(out, "outcome.json", &export::outcome_json(&run.outcome))?;
    write(out, "path.json", &export::path_json(&run.initial_path))?;
    write(out, "path.csv", &export::path_csv(&run.initial_path))?;
    if s.sim.record_polar {
        write(out, "polar.csv", &export::polar_csv(&run.polar_log))?;
    }
    let img = render::render_path(
        &run.world.terrain,
        s.ground_truth_soil.as_ref(),
        &s.crates,
        Some(&run.initial_path),
        &render::trajectory(&run.trace),
        s.start,
        s.goal,
        4,
    );
    write(out, "path.ppm", &encode_ppm(&img))
}

fn cmd_simulate(cli: &Cli, paths: &[PathBuf], jobs: usize) -> Result<i32> {
    let mut scenarios = Vec::with_capacity(paths.len());
    for p in paths {
        scenarios.push(load_scenario(p, &cli.sets, cli.seed)?.1);
    }
    let results = run_batch(&scenarios, jobs)?;
    let mut code = 0;
    for ((path, s), result) in paths.iter().zip(&scenarios).zip(results) {
        let out = if paths.len() == 1 {
            cli.out.clone()
        } else {
            cli.out.join(path.file_stem().unwrap_or(path.as_os_str()))
        };
        match result {
            Ok(run) => {
                write_run(&out, s, &run)?;
                let o = &run.outcome;
                println!(
                    "{}: {:?} after {} steps, path {:.3} m, clearance {:.3} m, {} replans",
                    path.display(),
                    o.termination,
                    o.steps,
                    o.path_length,
                    o.min_clearance,
                    o.replans
                );
                if !o.reached {
                    code = code.max(1);
                }
            }
            Err(e) => {
                let e = Error::from(e);
                eprintln!("termite-nav: {}: {e}", path.display());
                code = code.max(e.exit_code());
            }
        }
    }
    Ok(code)
}

fn cmd_render(cli: &Cli, path: &Path, scale: usize) -> Result<i32> {
    if scale == 0 {
        return Err(Error::Usage("--scale must be at least 1".into()));
    }
    let (_, s) = load_scenario(path, &cli.sets, cli.seed)?;
    let run = run_scenario_parallel(&s)?;
    let w = &run.world;
    write(&cli.out, "rank.pgm", &render::rank_pgm(&w.terrain))?;
    write(
        &cli.out,
        "dual_grid.ppm",
        &encode_ppm(&render::render_dual_grid(&w.terrain, &w.swathe, &w.dual, scale)),
    )?;
    write(
        &cli.out,
        "nests.ppm",
        &encode_ppm(&render::render_nests(&w.terrain, &w.dual, &w.nests(), scale)),
    )?;
    write(
        &cli.out,
        "nests_final.ppm",
        &encode_ppm(&render::render_nests(&w.terrain, &w.dual, &run.final_nav.nests, scale)),
    )?;
    let img = render::render_path(
        &w.terrain,
        s.ground_truth_soil.as_ref(),
        &s.crates,
        Some(&run.initial_path),
        &render::trajectory(&run.trace),
        s.start,
        s.goal,
        scale,
    );
    write(&cli.out, "path.ppm", &encode_ppm(&img))?;
    println!("rendered {} to {}", path.display(), cli.out.display());
    Ok(if run.outcome.reached { 0 } else { 1 })
}
