//! Localization metrics over disorder strengths and realizations.

use std::io::Write;

use anderson_core::equilibrium::{localization_metrics, EntropyMode, LocalizationMetrics};
use rayon::prelude::*;
use serde::Serialize;

use super::{median, Realized, Run};
use crate::error::Result;
use crate::manifest::AuditRecord;

#[derive(Serialize)]
struct MetricsLine {
    sigma_over_v: f64,
    n: usize,
    realization: u64,
    seed: u64,
    entropy_mode: EntropyMode,
    #[serde(flatten)]
    metrics: LocalizationMetrics,
}

struct Point {
    sigma: f64,
    realization: u64,
    audit: Option<AuditRecord>,
    outcome: std::result::Result<LocalizationMetrics, String>,
}

fn evaluate(run: &Run, sigma: f64, r: u64) -> Point {
    let cfg = run.cfg;
    let grid = match cfg.entropy_mode {
        EntropyMode::AverageOfEntropy => Some(&cfg.time_grid),
        EntropyMode::EntropyOfAverage => None,
    };
    let real = match Realized::new(cfg, sigma, r) {
        Ok(real) => real,
        Err(e) => {
            return Point {
                sigma,
                realization: r,
                audit: None,
                outcome: Err(e.to_string()),
            }
        }
    };
    Point {
        sigma,
        realization: r,
        audit: Some(real.audit(None)),
        outcome: localization_metrics(&real.eig, cfg.entropy_mode, grid).map_err(|e| e.to_string()),
    }
}

struct Spread {
    median: f64,
    min: f64,
    max: f64,
}

fn spread(values: &[f64]) -> Option<Spread> {
    if values.is_empty() {
        return None;
    }
    Some(Spread {
        median: median(values),
        min: values.iter().copied().fold(f64::INFINITY, f64::min),
        max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    })
}

pub fn run(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let n = cfg.spec.n;
    let seed = cfg.spec.seed;
    run.out.add_metadata("entropy_mode", cfg.entropy_mode.as_str());
    if cfg.entropy_mode == EntropyMode::AverageOfEntropy {
        run.auxiliary_seeds.push(("time_jitter".into(), cfg.time_grid.jitter_seed));
    }
    let grid = cfg.sigma_grid();
    let tasks: Vec<(f64, u64)> = grid
        .iter()
        .flat_map(|&s| (0..cfg.realizations as u64).map(move |r| (s, r)))
        .collect();
    let shared: &Run = run;
    let points: Vec<Point> = tasks.par_iter().map(|&(s, r)| evaluate(shared, s, r)).collect();

    let mut lines = Vec::new();
    for p in &points {
        run.record_seed(p.sigma, p.realization);
        if let Some(a) = &p.audit {
            run.audits.push(a.clone());
        }
        match &p.outcome {
            Ok(m) => lines.push(MetricsLine {
                sigma_over_v: p.sigma,
                n,
                realization: p.realization,
                seed,
                entropy_mode: cfg.entropy_mode,
                metrics: *m,
            }),
            Err(e) => run
                .failures
                .push(format!("sigma_over_v={} realization={}: {e}", p.sigma, p.realization)),
        }
    }
    for f in &run.failures {
        eprintln!("warning: {f}");
    }

    run.out.csv(
        "sweep.csv",
        "sigma_over_v [1], n [sites], realization, status, sqrt_mssd [sites], \
         sqrt2_over_ipr [sites], n_effective [states], mssd [sites^2], ipr_mean [1]",
        |w| {
            writeln!(
                w,
                "sigma_over_v,n,realization,status,sqrt_mssd,sqrt2_over_ipr,n_effective,mssd,ipr_mean"
            )?;
            for p in &points {
                match &p.outcome {
                    Ok(m) => writeln!(
                        w,
                        "{},{n},{},ok,{},{},{},{},{}",
                        p.sigma, p.realization, m.sqrt_mssd, m.sqrt2_over_ipr, m.n_effective, m.equilibrium_mssd, m.mean_ipr
                    )?,
                    Err(_) => writeln!(w, "{},{n},{},failed,,,,,", p.sigma, p.realization)?,
                }
            }
            Ok(())
        },
    )?;

    run.out.csv(
        "sweep_aggregate.csv",
        "sigma_over_v [1], n [sites], ok and failed realization counts, then median/min/max across \
         realizations of sqrt_mssd [sites], sqrt2_over_ipr [sites], n_effective [states]",
        |w| {
            writeln!(
                w,
                "sigma_over_v,n,ok,failed,\
                 sqrt_mssd_median,sqrt_mssd_min,sqrt_mssd_max,\
                 sqrt2_over_ipr_median,sqrt2_over_ipr_min,sqrt2_over_ipr_max,\
                 n_effective_median,n_effective_min,n_effective_max"
            )?;
            for &sigma in &grid {
                let ok: Vec<&LocalizationMetrics> = points
                    .iter()
                    .filter(|p| p.sigma == sigma)
                    .filter_map(|p| p.outcome.as_ref().ok())
                    .collect();
                let failed = cfg.realizations - ok.len();
                write!(w, "{sigma},{n},{},{failed}", ok.len())?;
                let columns: [fn(&LocalizationMetrics) -> f64; 3] =
                    [|m| m.sqrt_mssd, |m| m.sqrt2_over_ipr, |m| m.n_effective];
                for f in columns {
                    let values: Vec<f64> = ok.iter().map(|m| f(m)).collect();
                    match spread(&values) {
                        Some(s) => write!(w, ",{},{},{}", s.median, s.min, s.max)?,
                        None => write!(w, ",,,")?,
                    }
                }
                writeln!(w)?;
            }
            Ok(())
        },
    )?;

    run.out.json_lines("metrics.jsonl", &lines)
}
