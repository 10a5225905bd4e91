//! Configuration, report rendering and command implementations behind the
//! `lrphase` binary.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

pub mod commands;
pub mod config;
pub mod format;

pub use commands::{Options, Rendered, SWEEP_HEADER};
pub use config::RunConfig;

/// Exit status when every check passes.
pub const EXIT_PASS: u8 = 0;
/// Exit status when at least one claim check fails.
pub const EXIT_FAIL: u8 = 1;
/// Exit status for configuration, validation and I/O errors.
pub const EXIT_CONFIG: u8 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] lrphase::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}
