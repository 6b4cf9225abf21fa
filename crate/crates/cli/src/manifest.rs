//! Run manifest: everything needed to rerun a command bit-for-bit.

use std::path::Path;

use anderson_core::spectral::{ResidualReport, SpectrumAudit};
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::output::OutputRecord;

pub const MANIFEST_FILE: &str = "manifest.json";

/// Seed and stream index of one disorder realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedRecord {
    pub sigma_over_v: f64,
    pub realization: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub sigma_over_v: f64,
    pub realization: u64,
    #[serde(flatten)]
    pub spectrum: SpectrumAudit,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub residuals: Option<ResidualReport>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub tool_version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub config_sha256: String,
    pub started_unix_seconds: u64,
    pub wall_clock_seconds: f64,
    pub threads: usize,
    /// Streams derived from the master seed besides the disorder draws.
    pub auxiliary_seeds: Vec<(String, u64)>,
    pub seeds: Vec<SeedRecord>,
    pub audits: Vec<AuditRecord>,
    /// Points that failed without aborting the run.
    pub failures: Vec<String>,
    pub outputs: Vec<OutputRecord>,
}

impl RunManifest {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }
}
