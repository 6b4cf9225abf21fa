//! Experiment configuration: JSON file, overridable by command-line flags.

use std::path::{Path, PathBuf};

use anderson_core::chain::ChainSpec;
use anderson_core::dynamics::{TimeGrid, TrajectoryLayout};
use anderson_core::equilibrium::EntropyMode;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const DEFAULT_OUTPUT_DIR: &str = "anderson-out";
pub const OUTPUT_DIR_ENV: &str = "ANDERSON_OUT_DIR";

/// Default disorder grid: 24 log-spaced points in [0.05, 20].
pub fn default_sigma_grid() -> Vec<f64> {
    log_grid(0.05, 20.0, 24)
}

pub fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    if points == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub spec: ChainSpec,
    #[serde(default = "defaults::realizations")]
    pub realizations: usize,
    #[serde(default = "defaults::time_grid")]
    pub time_grid: TimeGrid,
    #[serde(default)]
    pub sweep: Option<Vec<f64>>,
    #[serde(default = "defaults::mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "defaults::output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub entropy_mode: EntropyMode,
    #[serde(default)]
    pub relax: RelaxConfig,
    /// Worker threads; `None` uses every core. Does not affect results.
    #[serde(default)]
    pub threads: Option<usize>,
}

/// Options of the `relax` command. Sites are 1-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RelaxConfig {
    pub origin: usize,
    pub snapshot_times: Vec<f64>,
    pub series_sites: Vec<usize>,
    pub trace_origins: Vec<usize>,
    /// Log-spaced positive times in each MSSD trace (t = 0 is added).
    pub trace_points: usize,
    pub short_time_max: f64,
    pub short_time_points: usize,
    pub layout: TrajectoryLayout,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        RelaxConfig {
            origin: 1,
            snapshot_times: vec![0.0, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0],
            series_sites: vec![1, 2, 3],
            trace_origins: vec![1, 2, 3],
            trace_points: 48,
            short_time_max: 10.0,
            short_time_points: 201,
            layout: TrajectoryLayout::Long,
        }
    }
}

mod defaults {
    use super::*;

    pub fn realizations() -> usize {
        8
    }

    pub fn time_grid() -> TimeGrid {
        TimeGrid {
            t_burn: 1e3,
            t_max: 1e5,
            m: 4000,
            jitter_seed: 1,
        }
    }

    pub fn mc_samples() -> usize {
        20_000
    }

    pub fn output_dir() -> PathBuf {
        std::env::var_os(OUTPUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            spec: ChainSpec {
                n: 1000,
                disorder_strength: 0.24,
                seed: 1,
                hopping: 1.0,
            },
            realizations: defaults::realizations(),
            time_grid: defaults::time_grid(),
            sweep: None,
            mc_samples: defaults::mc_samples(),
            output_dir: defaults::output_dir(),
            entropy_mode: EntropyMode::default(),
            relax: RelaxConfig::default(),
            threads: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.time_grid.validate()?;
        if self.realizations == 0 {
            return Err(CliError::Config("realizations must be at least 1".into()));
        }
        if self.mc_samples < 2 {
            return Err(CliError::Config(
                "mc_samples must be at least 2 for a standard error".into(),
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.is_empty() {
                return Err(CliError::Config("sweep list is empty".into()));
            }
            if sweep.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
                return Err(CliError::Config("sweep values must be finite and >= 0".into()));
            }
            if sweep.windows(2).any(|w| w[0] >= w[1]) {
                return Err(CliError::Config("sweep values must be strictly increasing".into()));
            }
        }
        if self.threads == Some(0) {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        let n = self.spec.n;
        let r = &self.relax;
        let site_ok = |j: &usize| (1..=n).contains(j);
        if !site_ok(&r.origin) {
            return Err(CliError::Config(format!("origin {} outside 1..={n}", r.origin)));
        }
        if let Some(j) = r.series_sites.iter().chain(&r.trace_origins).find(|j| !site_ok(j)) {
            return Err(CliError::Config(format!("site {j} outside 1..={n}")));
        }
        if r.snapshot_times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Config("snapshot times must be finite".into()));
        }
        if !(r.short_time_max.is_finite() && r.short_time_max > 0.0) || r.short_time_points < 2 {
            return Err(CliError::Config(
                "short-time window needs a positive end and at least 2 points".into(),
            ));
        }
        Ok(())
    }

    /// Explicit sweep list or the default grid.
    pub fn sigma_grid(&self) -> Vec<f64> {
        self.sweep.clone().unwrap_or_else(default_sigma_grid)
    }

    /// SHA-256 of the configuration with the fields that cannot change any
    /// output (`output_dir`, `threads`) blanked.
    pub fn content_hash(&self) -> String {
        let mut canonical = self.clone();
        canonical.output_dir = PathBuf::new();
        canonical.threads = None;
        let json = serde_json::to_vec(&canonical).expect("config serializes");
        hex::encode(Sha256::digest(&json))
    }
}
