//! The `gifkit` command-line driver.
//!
//! Every subcommand reads JSON inputs, writes its result to `--out` (or
//! standard output) and maps failures to exit codes: 0 on success, 1 when a
//! checked property fails, 2 on usage, configuration or I/O errors. Errors
//! are also printed to standard error as a single JSON object.

pub mod args;
pub mod bridge;
pub mod commands;
pub mod suite;

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde_json::json;
use thiserror::Error;

pub use args::Cli;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Config { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] gifkit_core::Error),
    /// A checked property does not hold. `detail` carries the evidence.
    #[error("{message}")]
    CheckFailed {
        message: String,
        detail: serde_json::Value,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::CheckFailed { .. } => 1,
            CliError::Core(gifkit_core::Error::NotIncompressible { .. }) => 1,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Config { .. } => "config",
            CliError::Io { .. } => "io",
            CliError::Core(gifkit_core::Error::NotIncompressible { .. }) => "not_incompressible",
            CliError::Core(_) => "invalid_input",
            CliError::CheckFailed { .. } => "check_failed",
        }
    }

    /// The machine-readable form printed on standard error.
    pub fn to_json(&self) -> serde_json::Value {
        let mut v = json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        });
        match self {
            CliError::CheckFailed { detail, .. } => v["detail"] = detail.clone(),
            CliError::Core(gifkit_core::Error::NotIncompressible { deviation }) => {
                v["detail"] = json!({ "max_tv_deviation": deviation });
            }
            CliError::Config { path, .. } | CliError::Io { path, .. } => {
                v["path"] = json!(path.display().to_string());
            }
            _ => {}
        }
        v
    }
}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| CliError::Config {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes to `out`, or to standard output when no path was given.
pub fn emit(out: Option<&Path>, contents: &str) -> CliResult<()> {
    match out {
        Some(path) => write_file(path, contents),
        None => {
            print!("{contents}");
            Ok(())
        }
    }
}

/// Runs a parsed command line.
pub fn run(cli: &Cli) -> CliResult<()> {
    commands::dispatch(cli)
}
