use std::io;
use std::path::PathBuf;

use termite_nav_core::corridor::CorridorError;
use termite_nav_core::global_planner::PlanError;
use termite_nav_core::sim::SimError;
use termite_nav_core::swarm::SwarmError;
use termite_nav_core::terrain::TerrainError;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
    #[error("malformed {what}: {detail}")]
    MalformedFormat { what: &'static str, detail: String },
    #[error("unsupported bit depth: maxval {0}, only 8-bit (255) images are accepted")]
    OutOfRangeDepth(u32),
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Terrain(#[from] TerrainError),
    #[error(transparent)]
    Corridor(#[from] CorridorError),
    #[error(transparent)]
    Swarm(#[from] SwarmError),
    #[error(transparent)]
    Plan(#[from] PlanError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Self::Io {
            path: path.into(),
            source,
        }
    }

    pub fn malformed(what: &'static str, detail: impl ToString) -> Self {
        Self::MalformedFormat {
            what,
            detail: detail.to_string(),
        }
    }

    /// 1 for domain failures (no path, empty swathe), 2 for bad input.
    pub fn exit_code(&self) -> i32 {
        match self {
            Self::Plan(_) => 1,
            Self::Corridor(e) => corridor_code(e),
            Self::Swarm(e) => swarm_code(e),
            Self::Sim(e) => match e {
                SimError::Plan(_) => 1,
                SimError::Corridor(e) => corridor_code(e),
                SimError::Swarm(e) => swarm_code(e),
                _ => 2,
            },
            _ => 2,
        }
    }
}

fn corridor_code(e: &CorridorError) -> i32 {
    match e {
        CorridorError::EmptySwathe => 1,
        _ => 2,
    }
}

fn swarm_code(e: &SwarmError) -> i32 {
    match e {
        SwarmError::EmptySwathe => 1,
        _ => 2,
    }
}
