//! Command-line surface. Flags override the JSON config file field by field.

use std::path::PathBuf;

use anderson_core::dynamics::TrajectoryLayout;
use anderson_core::equilibrium::EntropyMode;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::commands::Command;
use crate::config::ExperimentConfig;
use crate::error::Result;

#[derive(Debug, Parser)]
#[command(name = "anderson", version, about = "Localization and equilibration experiments on a disordered ring")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Eigenvalues, overlaps, site energies and solver diagnostics.
    Spectrum(ExperimentArgs),
    /// Dynamics from a localized start: snapshots, series, profiles, MSSD traces.
    Relax {
        #[command(flatten)]
        common: ExperimentArgs,
        #[command(flatten)]
        relax: RelaxArgs,
    },
    /// Localization metrics across disorder strengths and realizations.
    Sweep(ExperimentArgs),
    /// Random pure state ensemble moments with a Monte Carlo check.
    Rpse(ExperimentArgs),
    /// Fluctuation/variance circle law across disorder strengths.
    Circle(ExperimentArgs),
    /// Rerun a command from its manifest and verify output hashes.
    Replay {
        manifest: PathBuf,
        /// Output directory for the rerun [default: <original>-replay].
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum EntropyModeArg {
    EntropyOfAverage,
    AverageOfEntropy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LayoutArg {
    Long,
    Wide,
}

#[derive(Debug, Default, Args)]
pub struct ExperimentArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Chain length.
    #[arg(long)]
    pub n: Option<usize>,
    /// Disorder strength sigma/V.
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Comma-separated, strictly increasing sigma/V values for sweeps.
    #[arg(long, value_delimiter = ',')]
    pub sigma_grid: Option<Vec<f64>>,
    /// Master seed; also seeds the time-grid jitter.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub realizations: Option<usize>,
    #[arg(long)]
    pub mc_samples: Option<usize>,
    #[arg(long)]
    pub t_burn: Option<f64>,
    #[arg(long)]
    pub t_max: Option<f64>,
    #[arg(long)]
    pub t_samples: Option<usize>,
    #[arg(long, value_enum)]
    pub entropy_mode: Option<EntropyModeArg>,
    /// Output directory [default: $ANDERSON_OUT_DIR or ./anderson-out].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Default, Args)]
pub struct RelaxArgs {
    /// Initial site (1-based).
    #[arg(long)]
    pub origin: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub snapshot_times: Option<Vec<f64>>,
    /// Sites (1-based) whose populations are traced in time.
    #[arg(long, value_delimiter = ',')]
    pub series_sites: Option<Vec<usize>>,
    /// Origins (1-based) of the individual MSSD traces.
    #[arg(long, value_delimiter = ',')]
    pub trace_origins: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub layout: Option<LayoutArg>,
}

impl ExperimentArgs {
    pub fn to_config(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::from_json_file(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(n) = self.n {
            cfg.spec.n = n;
        }
        if let Some(s) = self.sigma {
            cfg.spec.disorder_strength = s;
        }
        if let Some(g) = &self.sigma_grid {
            cfg.sweep = Some(g.clone());
        }
        if let Some(seed) = self.seed {
            cfg.spec.seed = seed;
            cfg.time_grid.jitter_seed = seed;
        }
        if let Some(r) = self.realizations {
            cfg.realizations = r;
        }
        if let Some(m) = self.mc_samples {
            cfg.mc_samples = m;
        }
        if let Some(t) = self.t_burn {
            cfg.time_grid.t_burn = t;
        }
        if let Some(t) = self.t_max {
            cfg.time_grid.t_max = t;
        }
        if let Some(m) = self.t_samples {
            cfg.time_grid.m = m;
        }
        if let Some(mode) = self.entropy_mode {
            cfg.entropy_mode = match mode {
                EntropyModeArg::EntropyOfAverage => EntropyMode::EntropyOfAverage,
                EntropyModeArg::AverageOfEntropy => EntropyMode::AverageOfEntropy,
            };
        }
        if let Some(out) = &self.out {
            cfg.output_dir = out.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        Ok(cfg)
    }
}

impl RelaxArgs {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        let r = &mut cfg.relax;
        if let Some(o) = self.origin {
            r.origin = o;
        }
        if let Some(t) = &self.snapshot_times {
            r.snapshot_times = t.clone();
        }
        if let Some(s) = &self.series_sites {
            r.series_sites = s.clone();
        }
        if let Some(s) = &self.trace_origins {
            r.trace_origins = s.clone();
        }
        if let Some(l) = self.layout {
            r.layout = match l {
                LayoutArg::Long => TrajectoryLayout::Long,
                LayoutArg::Wide => TrajectoryLayout::Wide,
            };
        }
    }
}

/// Resolved invocation: a command with its configuration, or a replay.
pub enum Invocation {
    Run(Command, Box<ExperimentConfig>),
    Replay {
        manifest: PathBuf,
        out: Option<PathBuf>,
        threads: Option<usize>,
    },
}

impl CliCommand {
    pub fn resolve(self) -> Result<Invocation> {
        Ok(match self {
            CliCommand::Spectrum(a) => Invocation::Run(Command::Spectrum, Box::new(a.to_config()?)),
            CliCommand::Relax { common, relax } => {
                let mut cfg = common.to_config()?;
                relax.apply(&mut cfg);
                Invocation::Run(Command::Relax, Box::new(cfg))
            }
            CliCommand::Sweep(a) => Invocation::Run(Command::Sweep, Box::new(a.to_config()?)),
            CliCommand::Rpse(a) => Invocation::Run(Command::Rpse, Box::new(a.to_config()?)),
            CliCommand::Circle(a) => Invocation::Run(Command::Circle, Box::new(a.to_config()?)),
            CliCommand::Replay { manifest, out, threads } => Invocation::Replay { manifest, out, threads },
        })
    }
}
