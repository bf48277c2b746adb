//! Scenario files, parameter groups and `--set key=value` overrides.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use termite_nav_core::geometry::Point;
use termite_nav_core::global_planner::PlannerParams;
use termite_nav_core::grid::Grid;
use termite_nav_core::local_planner::{SoilVetoParams, VfhParams};
use termite_nav_core::sim::{Crate, RobotParams, Scenario, SensorParams, SimParams};
use termite_nav_core::swarm::SwarmParams;
use termite_nav_core::terrain::{CatMapping, HeightMap, SoilCategory, TerrainParams};

use crate::error::{Error, Result};
use crate::pnm::read_pgm;
use crate::soil::{cat_mapping_from, load_soilmap, read_cat_mapping};

/// Every tunable, grouped the way `--set` keys address them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct Params {
    pub terrain: TerrainParams,
    pub robot: RobotParams,
    pub sensor: SensorParams,
    pub swarm: SwarmParams,
    pub vfh: VfhParams,
    pub soil_veto: SoilVetoParams,
    pub planner: PlannerParams,
    pub sim: SimParams,
}

/// Either a path to a JSON mapping file or the mapping inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CatMappingSource {
    Path(PathBuf),
    Inline(BTreeMap<String, String>),
}

fn default_goal_tolerance() -> f64 {
    0.5
}

/// On-disk scenario. Raster paths are relative to the file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ScenarioFile {
    pub heightmap_path: PathBuf,
    pub soilmap_path: PathBuf,
    pub cat_mapping: CatMappingSource,
    #[serde(default)]
    pub ground_truth_soil_path: Option<PathBuf>,
    pub start: Point,
    pub goal: Point,
    #[serde(default = "default_goal_tolerance")]
    pub goal_tolerance: f64,
    #[serde(default)]
    pub crates: Vec<Crate>,
    /// Shorthand for `sim.dt`.
    #[serde(default)]
    pub dt: Option<f64>,
    /// Shorthand for `sim.maxSteps`.
    #[serde(default)]
    pub max_steps: Option<usize>,
    #[serde(flatten)]
    pub params: Params,
}

/// Replaces the value at each dotted key. Keys must already exist in `tree`;
/// values parse as JSON and fall back to plain strings.
pub fn apply_overrides(tree: &mut Value, sets: &[String]) -> Result<()> {
    for set in sets {
        let (key, raw) = set
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override {set:?} is not of the form key=value")))?;
        let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.to_string()));
        let mut slot = &mut *tree;
        for part in key.trim().split('.') {
            slot = match slot {
                Value::Object(map) => map.get_mut(part),
                Value::Array(items) => part.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
                _ => None,
            }
            .ok_or_else(|| Error::Usage(format!("unknown parameter {key:?}")))?;
        }
        *slot = value;
    }
    Ok(())
}

/// Reports the first key of `given` that `canonical` does not have.
fn unknown_key(given: &Value, canonical: &Value, prefix: &str) -> Option<String> {
    let (Value::Object(g), Value::Object(c)) = (given, canonical) else {
        return None;
    };
    g.iter().find_map(|(k, v)| {
        let path = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
        match c.get(k) {
            None => Some(path),
            // cat mappings and crates are free-form maps or lists
            Some(cv) if k != "catMapping" => unknown_key(v, cv, &path),
            Some(_) => None,
        }
    })
}

fn from_tree<T: for<'de> Deserialize<'de>>(tree: Value, what: &str) -> Result<T> {
    serde_json::from_value(tree).map_err(|e| Error::Usage(format!("invalid {what}: {e}")))
}

/// Parameter groups with overrides applied and an optional seed.
pub fn params_with(sets: &[String], seed: Option<u64>) -> Result<Params> {
    let mut tree = serde_json::to_value(Params::default()).expect("params serialize");
    apply_overrides(&mut tree, sets)?;
    let mut params: Params = from_tree(tree, "parameters")?;
    if let Some(seed) = seed {
        params.swarm.seed = seed;
    }
    Ok(params)
}

/// Parses a scenario file, rejecting unknown keys, then applies overrides.
pub fn parse_scenario_file(bytes: &[u8], sets: &[String], seed: Option<u64>) -> Result<ScenarioFile> {
    let given: Value = serde_json::from_slice(bytes).map_err(|e| Error::malformed("scenario JSON", e))?;
    let parsed: ScenarioFile = serde_json::from_value(given.clone()).map_err(|e| Error::malformed("scenario JSON", e))?;
    let mut tree = serde_json::to_value(&parsed).expect("scenario serializes");
    if let Some(key) = unknown_key(&given, &tree, "") {
        return Err(Error::malformed("scenario JSON", format!("unknown field {key:?}")));
    }
    apply_overrides(&mut tree, sets)?;
    let mut file: ScenarioFile = from_tree(tree, "scenario override")?;
    if let Some(dt) = file.dt {
        file.params.sim.dt = dt;
    }
    if let Some(n) = file.max_steps {
        file.params.sim.max_steps = n;
    }
    if let Some(seed) = seed {
        file.params.swarm.seed = seed;
    }
    Ok(file)
}

pub fn read_file(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Rows and columns of the grid that sub-sampling `hm` yields.
pub fn subsampled_dims(hm: &HeightMap, terrain: &TerrainParams) -> (usize, usize) {
    (
        hm.height().div_ceil(terrain.block_h.max(1)),
        hm.width().div_ceil(terrain.block_w.max(1)),
    )
}

/// The three rasters every pipeline stage starts from.
#[derive(Debug, Clone)]
pub struct Inputs {
    pub heightmap: HeightMap,
    pub soil: Grid<SoilCategory>,
    pub mapping: CatMapping,
}

pub fn load_inputs(heightmap: &Path, soil: &Path, catmap: &CatMappingSource, terrain: &TerrainParams, base: &Path) -> Result<Inputs> {
    let heightmap = read_pgm(&read_file(&base.join(heightmap))?)?;
    let mapping = match catmap {
        CatMappingSource::Path(p) => read_cat_mapping(&read_file(&base.join(p))?)?,
        CatMappingSource::Inline(m) => cat_mapping_from(m)?,
    };
    let dims = subsampled_dims(&heightmap, terrain);
    let soil = load_soilmap(&read_file(&base.join(soil))?, &mapping, dims)?;
    Ok(Inputs {
        heightmap,
        soil,
        mapping,
    })
}

/// Loads a scenario file and its rasters.
pub fn load_scenario(path: &Path, sets: &[String], seed: Option<u64>) -> Result<(ScenarioFile, Scenario)> {
    let file = parse_scenario_file(&read_file(path)?, sets, seed)?;
    let base = path.parent().unwrap_or(Path::new("."));
    let scenario = build_scenario(&file, base)?;
    Ok((file, scenario))
}

pub fn build_scenario(file: &ScenarioFile, base: &Path) -> Result<Scenario> {
    let p = &file.params;
    let inputs = load_inputs(&file.heightmap_path, &file.soilmap_path, &file.cat_mapping, &p.terrain, base)?;
    let ground_truth_soil = match &file.ground_truth_soil_path {
        Some(gt) => {
            let dims = (inputs.soil.rows(), inputs.soil.cols());
            Some(load_soilmap(&read_file(&base.join(gt))?, &inputs.mapping, dims)?)
        }
        None => None,
    };
    Ok(Scenario {
        heightmap: inputs.heightmap,
        soil: inputs.soil,
        ground_truth_soil,
        terrain: p.terrain,
        start: file.start,
        goal: file.goal,
        goal_tolerance: file.goal_tolerance,
        crates: file.crates.clone(),
        robot: p.robot,
        sensor: p.sensor,
        swarm: p.swarm,
        vfh: p.vfh,
        soil_veto: p.soil_veto,
        planner: p.planner,
        sim: p.sim,
    })
}
