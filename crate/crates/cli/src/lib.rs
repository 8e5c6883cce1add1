//! Command-line front end: configuration, scenario runs and artifact output.

pub mod config;
pub mod error;
pub mod output;
pub mod run;

use std::fs;
use std::path::Path;

pub use config::{parse_config, Format, RunConfig, Scenario};
pub use error::{ConfigError, RunError};

/// Reads a config file, or starts from an empty config when `path` is `None`.
pub fn load_config(path: Option<&Path>) -> Result<RunConfig, ConfigError> {
    match path {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|source| ConfigError::Read {
                path: p.to_path_buf(),
                source,
            })?;
            parse_config(&text)
        }
        None => Ok(RunConfig::default()),
    }
}
