//! Termite-style nest discovery on a coarse grid.
//!
//! Agents wander the swathe and drop permanent pellets on cells whose rank
//! meets the threshold. A cell that collects `pellet_max` pellets becomes a
//! focal point: the agent switches to building, and if every swathe cell in
//! the focal's Moore neighbourhood also qualifies, the focal and those
//! neighbours become a nest. Nests that touch (4-adjacency) are merged.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corridor::CoarseGrid;
use crate::grid::{Cell, Grid};

pub type NestId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SwarmError {
    EmptySwathe,
    InvalidParameter(&'static str),
}

impl fmt::Display for SwarmError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::EmptySwathe => write!(f, "coarse grid has no swathe cells"),
            Self::InvalidParameter(what) => write!(f, "invalid swarm parameter: {what}"),
        }
    }
}

impl core::error::Error for SwarmError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, rename_all = "camelCase"))]
pub struct SwarmParams {
    pub n_agents: usize,
    pub pellet_max: u32,
    pub rank_threshold: u8,
    pub max_iterations: usize,
    pub seed: u64,
    /// Chebyshev radius around the focal cell explored while building.
    pub forage_radius: usize,
    /// Building steps before an agent gives up on a focal cell.
    pub stall_budget: u32,
}

impl Default for SwarmParams {
    fn default() -> Self {
        Self {
            n_agents: 10,
            pellet_max: 8,
            rank_threshold: 7,
            max_iterations: 5000,
            seed: 0,
            forage_radius: 2,
            stall_budget: 16,
        }
    }
}

impl SwarmParams {
    pub fn validate(&self) -> Result<(), SwarmError> {
        if self.n_agents == 0 {
            return Err(SwarmError::InvalidParameter("nAgents must be at least 1"));
        }
        if self.pellet_max == 0 {
            return Err(SwarmError::InvalidParameter("pelletMax must be at least 1"));
        }
        if self.max_iterations == 0 {
            return Err(SwarmError::InvalidParameter("maxIterations must be at least 1"));
        }
        if !(2..=10).contains(&self.rank_threshold) {
            return Err(SwarmError::InvalidParameter("rankThreshold must lie in [2, 10]"));
        }
        Ok(())
    }

    fn qualifies(&self, grid: &CoarseGrid, cell: Cell) -> bool {
        let c = grid.cell(cell);
        c.in_swathe && c.rank >= self.rank_threshold
    }
}

/// Pellet counts per coarse cell. Counts never decrease.
pub type PelletField = Grid<u32>;

/// Nest membership per coarse cell. A cell belongs to at most one nest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestMap {
    ids: Grid<Option<NestId>>,
    nests: BTreeMap<NestId, BTreeSet<Cell>>,
    next_id: NestId,
}

impl NestMap {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            ids: Grid::filled(rows, cols, None),
            nests: BTreeMap::new(),
            next_id: 0,
        }
    }

    pub fn for_grid(grid: &CoarseGrid) -> Self {
        Self::new(grid.rows(), grid.cols())
    }

    pub fn rows(&self) -> usize {
        self.ids.rows()
    }

    pub fn cols(&self) -> usize {
        self.ids.cols()
    }

    pub fn nest_of(&self, cell: Cell) -> Option<NestId> {
        self.ids.get(cell.0, cell.1).copied().flatten()
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.nest_of(cell).is_some()
    }

    pub fn nests(&self) -> &BTreeMap<NestId, BTreeSet<Cell>> {
        &self.nests
    }

    pub fn len(&self) -> usize {
        self.nests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nests.is_empty()
    }

    /// Total number of nest cells.
    pub fn cell_count(&self) -> usize {
        self.nests.values().map(BTreeSet::len).sum()
    }

    /// All nest cells in row-major order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.ids
            .iter_cells()
            .filter(|(_, id)| id.is_some())
            .map(|(cell, _)| cell)
    }

    /// Adds a nest. Existing nests sharing a cell with it are absorbed; the
    /// combined nest keeps the smallest id involved. Out-of-bounds cells are
    /// ignored. Returns the id that now holds the cells.
    pub fn insert_nest(&mut self, cells: impl IntoIterator<Item = Cell>) -> NestId {
        let cells: BTreeSet<Cell> = cells
            .into_iter()
            .filter(|&(r, c)| self.ids.contains(r, c))
            .collect();
        let touched: BTreeSet<NestId> = cells.iter().filter_map(|&c| self.nest_of(c)).collect();
        let id = match touched.first() {
            Some(&min) => min,
            None => {
                let id = self.next_id;
                self.next_id += 1;
                id
            }
        };
        let mut merged = BTreeSet::new();
        for old in &touched {
            if let Some(old_cells) = self.nests.remove(old) {
                merged.extend(old_cells);
            }
        }
        merged.extend(cells);
        for &cell in &merged {
            self.ids[cell] = Some(id);
        }
        self.nests.insert(id, merged);
        id
    }

    /// Drops `cell` from its nest. Returns whether anything changed. Nests may
    /// be left disconnected; see [`merge_nests`].
    pub fn remove_cell(&mut self, cell: Cell) -> bool {
        let Some(id) = self.nest_of(cell) else {
            return false;
        };
        self.ids[cell] = None;
        if let Some(set) = self.nests.get_mut(&id) {
            set.remove(&cell);
            if set.is_empty() {
                self.nests.remove(&id);
            }
        }
        true
    }

    /// Whether `other` holds no cell outside `self`.
    pub fn is_superset_of(&self, other: &NestMap) -> bool {
        other.cells().all(|c| self.contains(c))
    }
}

/// Recomputes nests as the 4-connected components of all nest cells.
///
/// Each component keeps the smallest input id found among its cells. When a
/// nest was split and that id is already taken by an earlier component, the
/// later piece gets a fresh id. Components are visited in order of their
/// smallest input id, then their first cell.
pub fn merge_nests(nests: &NestMap) -> NestMap {
    let (rows, cols) = (nests.rows(), nests.cols());
    let mut seen = Grid::filled(rows, cols, false);
    let mut components: Vec<(NestId, Vec<Cell>)> = Vec::new();
    for start in nests.cells() {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        let mut cells = Vec::new();
        let mut min_id = NestId::MAX;
        while let Some(cell) = queue.pop_front() {
            min_id = min_id.min(nests.nest_of(cell).expect("nest cell"));
            cells.push(cell);
            for n in nests.ids.edge_neighbors(cell.0, cell.1) {
                if !seen[n] && nests.contains(n) {
                    seen[n] = true;
                    queue.push_back(n);
                }
            }
        }
        components.push((min_id, cells));
    }
    components.sort_by_key(|(id, cells)| (*id, cells[0]));

    let mut out = NestMap::new(rows, cols);
    let mut fresh = nests.next_id.max(
        nests
            .nests
            .keys()
            .next_back()
            .map_or(0, |&k| k + 1),
    );
    for (id, cells) in components {
        let id = if out.nests.contains_key(&id) {
            fresh += 1;
            fresh - 1
        } else {
            id
        };
        for &c in &cells {
            out.ids[c] = Some(id);
        }
        out.nests.insert(id, cells.into_iter().collect());
    }
    out.next_id = fresh;
    out
}

/// Creates a nest around `focal` when the focal and every swathe cell of its
/// Moore neighbourhood meet the rank threshold. The caller is expected to
/// have confirmed the focal's pellet count has reached `pellet_max`.
pub fn try_build_nest(
    focal: Cell,
    grid: &CoarseGrid,
    nests: &mut NestMap,
    params: &SwarmParams,
) -> Option<NestId> {
    if !params.qualifies(grid, focal) {
        return None;
    }
    let vicinity: Vec<Cell> = grid
        .cells()
        .moore_neighbors(focal.0, focal.1)
        .filter(|&n| grid.in_swathe(n))
        .collect();
    if !vicinity.iter().all(|&n| params.qualifies(grid, n)) {
        return None;
    }
    Some(nests.insert_nest(core::iter::once(focal).chain(vicinity)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentMode {
    Dropping,
    Building { focal: Cell, steps: u32 },
}

#[derive(Debug, Clone)]
pub struct Agent {
    pub id: usize,
    pub position: Cell,
    pub mode: AgentMode,
    rng: ChaCha8Rng,
}

impl Agent {
    /// An agent whose random stream depends only on `(seed, id)`.
    pub fn new(id: usize, position: Cell, seed: u64) -> Self {
        Self {
            id,
            position,
            mode: AgentMode::Dropping,
            rng: agent_rng(seed, id),
        }
    }

    /// Places the agent on a uniformly random swathe cell.
    pub fn spawn(id: usize, swathe: &[Cell], seed: u64) -> Self {
        let mut rng = agent_rng(seed, id);
        let position = swathe[rng.random_range(0..swathe.len())];
        Self {
            id,
            position,
            mode: AgentMode::Dropping,
            rng,
        }
    }

    fn wander(&mut self, grid: &CoarseGrid, leash: Option<(Cell, usize)>) {
        let (r, c) = self.position;
        let mut options = [(0usize, 0usize); 8];
        let mut n = 0;
        for cell in grid.cells().moore_neighbors(r, c) {
            let within = leash.is_none_or(|(f, radius)| {
                f.0.abs_diff(cell.0) <= radius && f.1.abs_diff(cell.1) <= radius
            });
            if within && grid.in_swathe(cell) {
                options[n] = cell;
                n += 1;
            }
        }
        if n > 0 {
            self.position = options[self.rng.random_range(0..n)];
        }
    }
}

fn agent_rng(seed: u64, id: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id as u64);
    rng
}

/// What a single agent step did.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepEvent {
    Moved,
    Dropped,
    FocalFound(Cell),
    NestBuilt(NestId),
    GaveUp,
}

/// Advances one agent by one step.
///
/// Dropping: a pellet goes on the current cell if it qualifies; reaching
/// `pellet_max` on a cell that is not yet a nest switches the agent to
/// building around it. Otherwise the agent moves to a random swathe
/// neighbour. Building: the first step tries the focal; later steps forage
/// within `forage_radius` of it, seeding qualifying cells and trying any that
/// reach `pellet_max`. The agent goes back to dropping once a nest is built or
/// after `stall_budget` steps.
pub fn step_agent(
    agent: &mut Agent,
    grid: &CoarseGrid,
    pellets: &mut PelletField,
    nests: &mut NestMap,
    params: &SwarmParams,
) -> StepEvent {
    match agent.mode {
        AgentMode::Dropping => {
            let here = agent.position;
            if params.qualifies(grid, here) {
                pellets[here] += 1;
                if pellets[here] >= params.pellet_max && !nests.contains(here) {
                    agent.mode = AgentMode::Building {
                        focal: here,
                        steps: 0,
                    };
                    return StepEvent::FocalFound(here);
                }
                agent.wander(grid, None);
                return StepEvent::Dropped;
            }
            agent.wander(grid, None);
            StepEvent::Moved
        }
        AgentMode::Building { focal, steps } => {
            if steps == 0 {
                if let Some(id) = try_build_nest(focal, grid, nests, params) {
                    agent.mode = AgentMode::Dropping;
                    return StepEvent::NestBuilt(id);
                }
            } else {
                agent.wander(grid, Some((focal, params.forage_radius)));
                let here = agent.position;
                if params.qualifies(grid, here) {
                    pellets[here] += 1;
                    if pellets[here] >= params.pellet_max && !nests.contains(here) {
                        if let Some(id) = try_build_nest(here, grid, nests, params) {
                            agent.mode = AgentMode::Dropping;
                            return StepEvent::NestBuilt(id);
                        }
                    }
                }
            }
            let steps = steps + 1;
            if steps >= params.stall_budget {
                agent.mode = AgentMode::Dropping;
                StepEvent::GaveUp
            } else {
                agent.mode = AgentMode::Building { focal, steps };
                StepEvent::Moved
            }
        }
    }
}

/// Result of a full swarm run over one coarse grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SwarmRun {
    pub nests: NestMap,
    pub pellets: PelletField,
}

/// Runs `n_agents` agents for `max_iterations` ticks. Within a tick agents
/// move in id order. Nests are merged once at the end.
pub fn run_swarm(grid: &CoarseGrid, params: &SwarmParams) -> Result<SwarmRun, SwarmError> {
    params.validate()?;
    let swathe: Vec<Cell> = grid.swathe_cells().collect();
    if swathe.is_empty() {
        return Err(SwarmError::EmptySwathe);
    }
    let mut agents: Vec<Agent> = (0..params.n_agents)
        .map(|id| Agent::spawn(id, &swathe, params.seed))
        .collect();
    let mut pellets = Grid::filled(grid.rows(), grid.cols(), 0u32);
    let mut nests = NestMap::for_grid(grid);
    for _ in 0..params.max_iterations {
        for agent in &mut agents {
            step_agent(agent, grid, &mut pellets, &mut nests, params);
        }
    }
    Ok(SwarmRun {
        nests: merge_nests(&nests),
        pellets,
    })
}

/// Seed for the second grid of a dual pair, decorrelated from the first.
pub fn secondary_seed(seed: u64) -> u64 {
    // splitmix64 finalizer
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Parameters used for grid `index` (0 or 1) of a dual pair.
pub fn params_for_grid(params: &SwarmParams, index: usize) -> SwarmParams {
    SwarmParams {
        seed: if index == 0 {
            params.seed
        } else {
            secondary_seed(params.seed)
        },
        ..*params
    }
}

/// Runs the swarm on both grids of a dual pair, one after the other.
pub fn run_dual_swarm(
    grids: &[CoarseGrid; 2],
    params: &SwarmParams,
) -> Result<[SwarmRun; 2], SwarmError> {
    let a = run_swarm(&grids[0], &params_for_grid(params, 0))?;
    let b = run_swarm(&grids[1], &params_for_grid(params, 1))?;
    Ok([a, b])
}
