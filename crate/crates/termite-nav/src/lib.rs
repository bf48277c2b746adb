//! File formats, rendering, threaded runners and the `termite-nav` command
//! line on top of [`termite_nav_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod export;
pub mod pnm;
pub mod render;
pub mod runner;
pub mod soil;

pub use error::{Error, Result};
