//! Experiment harness for the fnparab solver library: run configuration,
//! the (p, q) sweep engine, the deterministic selfcheck suite, and run
//! manifests with checksummed outputs.

pub mod config;
pub mod manifest;
pub mod runner;
pub mod selfcheck;
pub mod sweep;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Configuration problem; the message carries the section/key path.
    #[error("config: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] fnparab::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    /// Runtime failure outside the solver itself.
    #[error("{0}")]
    Run(String),
}

pub type Result<T> = std::result::Result<T, HarnessError>;
