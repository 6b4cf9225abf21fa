//! Relaxation from a localized start: snapshots, site time series,
//! equilibrium profiles and MSSD traces for realization 0.

use std::io::Write;

use anderson_core::dynamics::{
    conditional_probability, instantaneous_mssd, origin_averaged_mssd, write_trajectory_csv, TrajectoryLayout,
};
use anderson_core::equilibrium::{displacement_profile, equilibrium_mssd, time_avg_conditional};
use anderson_core::dynamics::displacement_range;
use anderson_core::spectral::{residual_report, EigenSystem};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{Realized, Run};
use crate::config::log_grid;
use crate::error::Result;

const TIME_CHUNK: usize = 64;

#[derive(Serialize)]
struct SiteSeries {
    site: usize,
    trajectory_mean: f64,
    closed_form: f64,
    abs_diff: f64,
}

#[derive(Serialize)]
struct Summary {
    sigma_over_v: f64,
    origin: usize,
    equilibrium_mssd: f64,
    equilibrium_localization_length: f64,
    origin_time_avg_mssd: f64,
    series: Vec<SiteSeries>,
    t_burn: f64,
    t_max: f64,
    samples: usize,
}

/// ρ_j(t) for the listed 0-based sites at each time, starting from `origin`.
fn site_series(eig: &EigenSystem, origin: usize, sites: &[usize], times: &[f64]) -> Vec<Vec<f64>> {
    let c = eig.overlaps();
    let a0: Vec<f64> = eig.site_row(origin).to_vec();
    let rows: Vec<Vec<f64>> = sites.iter().map(|&j| eig.site_row(j).to_vec()).collect();
    let chunks: Vec<Vec<Vec<f64>>> = times
        .par_chunks(TIME_CHUNK)
        .map(|chunk| {
            let mut amps = vec![Complex64::new(0.0, 0.0); c.ncols()];
            chunk
                .iter()
                .map(|&t| {
                    for ((a, &a0k), &e) in amps.iter_mut().zip(&a0).zip(eig.eigenvalues()) {
                        *a = Complex64::cis(-e * t) * a0k;
                    }
                    rows.iter()
                        .map(|row| {
                            let z: Complex64 = row.iter().zip(&amps).map(|(&cj, a)| a * cj).sum();
                            z.norm_sqr()
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    chunks.into_iter().flatten().collect()
}

fn write_series<W: Write>(w: &mut W, sites: &[usize], times: &[f64], values: &[Vec<f64>]) -> std::io::Result<()> {
    write!(w, "t")?;
    for s in sites {
        write!(w, ",rho_{s}")?;
    }
    writeln!(w)?;
    for (t, row) in times.iter().zip(values) {
        write!(w, "{t}")?;
        for v in row {
            write!(w, ",{v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn run(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let rc = &cfg.relax;
    let sigma = cfg.spec.disorder_strength;
    run.out.add_metadata("sigma_over_v", sigma);
    run.out.add_metadata("origin", rc.origin);
    run.out.add_metadata("time_unit", "hbar/V");

    let real = Realized::new(cfg, sigma, 0)?;
    run.record_seed(sigma, 0);
    run.audits.push(real.audit(Some(residual_report(&real.hamiltonian, &real.eig)?)));
    let eig = &real.eig;
    eig.require_nondegenerate()?;
    let n = eig.dim();
    let j0 = rc.origin - 1;

    let snapshots = rc
        .snapshot_times
        .par_iter()
        .map(|&t| conditional_probability(eig, j0, t).map(|d| (t, d)))
        .collect::<anderson_core::error::Result<Vec<_>>>()?;
    let layout_doc = match rc.layout {
        TrajectoryLayout::Long => "t [hbar/V], j [site], rho [probability]",
        TrajectoryLayout::Wide => "t [hbar/V], rho_1..rho_N [probability]",
    };
    run.out
        .csv("snapshots.csv", layout_doc, |w| write_trajectory_csv(w, &snapshots, rc.layout))?;

    let sites: Vec<usize> = rc.series_sites.iter().map(|s| s - 1).collect();
    let short_times: Vec<f64> = (0..rc.short_time_points)
        .map(|i| rc.short_time_max * i as f64 / (rc.short_time_points - 1) as f64)
        .collect();
    let short = site_series(eig, j0, &sites, &short_times);
    run.out.csv("transient.csv", "t [hbar/V], rho_<site> [probability]", |w| {
        write_series(w, &rc.series_sites, &short_times, &short)
    })?;

    let grid = &cfg.time_grid;
    run.auxiliary_seeds.push(("time_jitter".into(), grid.jitter_seed));
    let long_times = grid.sample_times();
    let long = site_series(eig, j0, &sites, &long_times);
    run.out.csv("series.csv", "t [hbar/V] jittered grid, rho_<site> [probability]", |w| {
        write_series(w, &rc.series_sites, &long_times, &long)
    })?;

    let closed = time_avg_conditional(eig, j0)?;
    let series = sites
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let mean = long.iter().map(|row| row[i]).sum::<f64>() / long.len() as f64;
            let exact = closed.probs()[j];
            SiteSeries {
                site: j + 1,
                trajectory_mean: mean,
                closed_form: exact,
                abs_diff: (mean - exact).abs(),
            }
        })
        .collect();

    run.out.csv(
        "equilibrium.csv",
        "delta_j [sites], j [site], rho_bar [probability] for the origin",
        |w| {
            writeln!(w, "delta_j,j,rho_bar")?;
            for dj in displacement_range(n) {
                let j = anderson_core::dynamics::shifted_site(j0, dj, n);
                writeln!(w, "{dj},{},{}", j + 1, closed.probs()[j])?;
            }
            Ok(())
        },
    )?;
    let profile = displacement_profile(eig)?;
    run.out.csv(
        "profile.csv",
        "delta_j [sites], rho_bar [probability] averaged over origins",
        |w| profile.write_csv(w),
    )?;

    let mut trace_times = vec![0.0];
    trace_times.extend(log_grid(0.1, grid.t_max, rc.trace_points));
    let origins: Vec<usize> = rc.trace_origins.iter().map(|o| o - 1).collect();
    let traces = trace_times
        .par_iter()
        .map(|&t| {
            let mut row = Vec::with_capacity(origins.len() + 1);
            for &o in &origins {
                row.push(instantaneous_mssd(&conditional_probability(eig, o, t)?, o)?.sqrt());
            }
            row.push(origin_averaged_mssd(eig, t).sqrt());
            Ok(row)
        })
        .collect::<anderson_core::error::Result<Vec<Vec<f64>>>>()?;
    run.out.csv(
        "mssd_traces.csv",
        "t [hbar/V], delta_j_<origin> = sqrt MSSD [sites], site_avg = sqrt of origin-averaged MSSD [sites]",
        |w| {
            write!(w, "t")?;
            for o in &rc.trace_origins {
                write!(w, ",delta_j_{o}")?;
            }
            writeln!(w, ",site_avg")?;
            for (t, row) in trace_times.iter().zip(&traces) {
                write!(w, "{t}")?;
                for v in row {
                    write!(w, ",{v}")?;
                }
                writeln!(w)?;
            }
            Ok(())
        },
    )?;

    let eq_mssd = equilibrium_mssd(&profile);
    let summary = Summary {
        sigma_over_v: sigma,
        origin: rc.origin,
        equilibrium_mssd: eq_mssd,
        equilibrium_localization_length: eq_mssd.sqrt(),
        origin_time_avg_mssd: instantaneous_mssd(&closed, j0)?,
        series,
        t_burn: grid.t_burn,
        t_max: grid.t_max,
        samples: grid.m,
    };
    run.out.json("relax_summary.json", &summary)
}
