pub mod circle;
pub mod relax;
pub mod replay;
pub mod rpse;
pub mod spectrum;
pub mod sweep;

use std::fmt;
use std::str::FromStr;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anderson_core::chain::{build_hamiltonian, sample_disorder, DisorderRealization, Hamiltonian};
use anderson_core::spectral::{audit_spectrum, diagonalize, EigenSystem, ResidualReport, DEFAULT_PAIR_CAP};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::manifest::{AuditRecord, RunManifest, SeedRecord, MANIFEST_FILE};
use crate::output::OutputDir;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Spectrum,
    Relax,
    Sweep,
    Rpse,
    Circle,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Relax => "relax",
            Command::Sweep => "sweep",
            Command::Rpse => "rpse",
            Command::Circle => "circle",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Command {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "spectrum" => Command::Spectrum,
            "relax" => Command::Relax,
            "sweep" => Command::Sweep,
            "rpse" => Command::Rpse,
            "circle" => Command::Circle,
            other => return Err(CliError::Config(format!("unknown command `{other}`"))),
        })
    }
}

/// State shared by a command while it runs.
pub struct Run<'a> {
    pub cfg: &'a ExperimentConfig,
    pub out: OutputDir,
    pub seeds: Vec<SeedRecord>,
    pub audits: Vec<AuditRecord>,
    pub failures: Vec<String>,
    pub auxiliary_seeds: Vec<(String, u64)>,
}

/// One diagonalized disorder realization.
pub struct Realized {
    pub sigma: f64,
    pub index: u64,
    pub disorder: DisorderRealization,
    pub hamiltonian: Hamiltonian,
    pub eig: EigenSystem,
}

impl Realized {
    pub fn new(cfg: &ExperimentConfig, sigma: f64, index: u64) -> Result<Self> {
        let spec = cfg.spec.with_disorder(sigma)?;
        let disorder = sample_disorder(&spec, index)?;
        let hamiltonian = build_hamiltonian(&disorder)?;
        let eig = diagonalize(&hamiltonian)?;
        Ok(Realized {
            sigma,
            index,
            disorder,
            hamiltonian,
            eig,
        })
    }

    pub fn audit(&self, residuals: Option<ResidualReport>) -> AuditRecord {
        AuditRecord {
            sigma_over_v: self.sigma,
            realization: self.index,
            spectrum: audit_spectrum(&self.eig, DEFAULT_PAIR_CAP),
            residuals,
        }
    }
}

impl Run<'_> {
    pub fn record_seed(&mut self, sigma: f64, realization: u64) {
        self.seeds.push(SeedRecord {
            sigma_over_v: sigma,
            realization,
            seed: self.cfg.spec.seed,
        });
    }
}

/// Validates `cfg`, runs `command` (on a dedicated pool when a thread count
/// is set) and writes the manifest.
pub fn execute(command: Command, cfg: &ExperimentConfig) -> Result<RunManifest> {
    cfg.validate()?;
    let started = Instant::now();
    let started_unix_seconds = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);

    let mut out = OutputDir::create(&cfg.output_dir)?;
    out.add_metadata("tool", format!("anderson {}", env!("CARGO_PKG_VERSION")));
    out.add_metadata("command", command);
    out.add_metadata("config_sha256", cfg.content_hash());
    out.add_metadata("n", cfg.spec.n);
    out.add_metadata("seed", cfg.spec.seed);
    let mut run = Run {
        cfg,
        out,
        seeds: Vec::new(),
        audits: Vec::new(),
        failures: Vec::new(),
        auxiliary_seeds: Vec::new(),
    };

    let body = |run: &mut Run| -> Result<usize> {
        match command {
            Command::Spectrum => spectrum::run(run)?,
            Command::Relax => relax::run(run)?,
            Command::Sweep => sweep::run(run)?,
            Command::Rpse => rpse::run(run)?,
            Command::Circle => circle::run(run)?,
        }
        Ok(rayon::current_num_threads())
    };
    let threads = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Config(format!("cannot start {t} worker threads: {e}")))?
            .install(|| body(&mut run))?,
        None => body(&mut run)?,
    };

    let manifest = RunManifest {
        tool: "anderson".into(),
        tool_version: env!("CARGO_PKG_VERSION").into(),
        command: command.to_string(),
        config: cfg.clone(),
        config_sha256: cfg.content_hash(),
        started_unix_seconds,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
        threads,
        auxiliary_seeds: run.auxiliary_seeds,
        seeds: run.seeds,
        audits: run.audits,
        failures: run.failures,
        outputs: run.out.records().to_vec(),
    };
    let mut bytes = serde_json::to_vec_pretty(&manifest).expect("manifest serializes");
    bytes.push(b'\n');
    run.out.write_unrecorded(MANIFEST_FILE, &bytes)?;
    Ok(manifest)
}

/// Median of a non-empty slice; mean of the middle pair for even lengths.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn command_names_round_trip() {
        for c in [Command::Spectrum, Command::Relax, Command::Sweep, Command::Rpse, Command::Circle] {
            assert_eq!(c.as_str().parse::<Command>().unwrap(), c);
        }
        assert!("plot".parse::<Command>().is_err());
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 3.0, 2.0]), 2.5);
        assert_eq!(median(&[7.0]), 7.0);
    }
}
