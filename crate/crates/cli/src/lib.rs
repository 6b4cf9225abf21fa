pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod manifest;
pub mod output;

pub use commands::{execute, Command};
pub use config::ExperimentConfig;
pub use error::{CliError, Result};
