//! Command implementations behind the `ksurf` binary.

// `!(x > 0.0)` is used on purpose so NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

pub mod commands;
pub mod config;
pub mod output;

pub use config::{parse_angle, parse_list, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("bad configuration: {0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invariant failed: {0}")]
    Invariant(String),
    #[error(transparent)]
    Core(#[from] ksurf::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Invariant(_) | CliError::Core(_) => 1,
            CliError::Config(_) => 2,
            CliError::Io { .. } => 3,
        }
    }
}

/// Runs `cfg.command` and returns a one-line summary.
pub fn run(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.check()?;
    match cfg.command.as_str() {
        "build" => commands::cmd_build(cfg),
        "energy-scan" => commands::cmd_energy_scan(cfg),
        "frontier" => commands::cmd_frontier(cfg),
        "bobbin" => commands::cmd_bobbin(cfg),
        "amsler" => commands::cmd_amsler(cfg),
        "verify" => commands::cmd_verify(cfg),
        other => Err(CliError::Config(format!("unknown command '{other}'"))),
    }
}
