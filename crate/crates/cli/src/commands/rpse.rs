//! Random pure state statistics on realization 0.

use std::io::Write;

use anderson_core::equilibrium::mean_ipr;
use anderson_core::rng::{stream, Domain};
use anderson_core::rpse::{ensemble_moments, mc_verify_moments, sample_rpse, state_time_avg_populations};
use anderson_core::spectral::residual_report;
use serde::Serialize;

use super::{Realized, Run};
use crate::error::Result;

/// Gate width for the Monte Carlo comparisons, in standard errors.
pub const MC_GATE: f64 = 3.0;

#[derive(Serialize)]
struct GateCount {
    within: usize,
    sites: usize,
}

#[derive(Serialize)]
struct Summary {
    sigma_over_v: f64,
    mc_samples: usize,
    ipr_mean: f64,
    scaled_fluct_site_avg: f64,
    one_minus_ipr_mean: f64,
    fluct_site_avg: f64,
    variance_site_avg: f64,
    budget: f64,
    mean_population_gate: GateCount,
    fluct_amplitude_gate: GateCount,
    variance_gate: GateCount,
}

pub fn run(run: &mut Run) -> Result<()> {
    let cfg = run.cfg;
    let sigma = cfg.spec.disorder_strength;
    let seed = cfg.spec.seed;
    run.out.add_metadata("sigma_over_v", sigma);

    let real = Realized::new(cfg, sigma, 0)?;
    run.record_seed(sigma, 0);
    run.audits.push(real.audit(Some(residual_report(&real.hamiltonian, &real.eig)?)));
    let eig = &real.eig;
    eig.require_nondegenerate()?;
    let n = eig.dim();
    let nf = n as f64;

    run.auxiliary_seeds.push(("random_state".into(), seed));
    let state = sample_rpse(n, &mut stream(seed, Domain::RandomState, 0));
    let rho_bar = state_time_avg_populations(eig, &state)?;
    run.out.csv(
        "rpse_state.csv",
        "j [site], rho_bar [probability] of one sampled state, ensemble_mean = 1/N",
        |w| {
            writeln!(w, "j,rho_bar,ensemble_mean")?;
            for (j, p) in rho_bar.probs().iter().enumerate() {
                writeln!(w, "{},{p},{}", j + 1, 1.0 / nf)?;
            }
            Ok(())
        },
    )?;

    let moments = ensemble_moments(eig);
    run.out.csv(
        "moments.csv",
        "j [site], fluct_amplitude, ensemble_variance, budget [probability^2]",
        |w| moments.write_csv(w),
    )?;

    let scale = nf * (nf + 1.0);
    let scaled: Vec<f64> = moments.fluct_amplitude.iter().map(|f| f * scale).collect();
    let scaled_avg = scaled.iter().sum::<f64>() / nf;
    run.out.csv(
        "fluct_scaled.csv",
        "j [site], scaled_fluct_amplitude = N(N+1) fluct_amplitude, site_avg [1]",
        |w| {
            writeln!(w, "j,scaled_fluct_amplitude,site_avg")?;
            for (j, s) in scaled.iter().enumerate() {
                writeln!(w, "{},{s},{scaled_avg}", j + 1)?;
            }
            Ok(())
        },
    )?;

    run.auxiliary_seeds.push(("monte_carlo".into(), seed));
    let est = mc_verify_moments(eig, cfg.mc_samples, seed)?;
    run.out.csv(
        "mc_moments.csv",
        "j [site]; Monte Carlo estimate, standard error and closed form of mean population, fluctuation amplitude and variance",
        |w| {
            writeln!(
                w,
                "j,mean_population,mean_population_se,mean_population_exact,\
                 fluct_amplitude,fluct_amplitude_se,fluct_amplitude_exact,\
                 variance,variance_se,variance_exact"
            )?;
            for j in 0..n {
                let (m, f, v) = (&est.mean_population[j], &est.fluct_amplitude[j], &est.variance[j]);
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{},{},{}",
                    j + 1,
                    m.value,
                    m.std_error,
                    1.0 / nf,
                    f.value,
                    f.std_error,
                    moments.fluct_amplitude[j],
                    v.value,
                    v.std_error,
                    moments.ensemble_variance[j]
                )?;
            }
            Ok(())
        },
    )?;

    let gate = |within: usize| GateCount { within, sites: n };
    let ipr = mean_ipr(eig);
    let summary = Summary {
        sigma_over_v: sigma,
        mc_samples: cfg.mc_samples,
        ipr_mean: ipr,
        scaled_fluct_site_avg: scaled_avg,
        one_minus_ipr_mean: 1.0 - ipr,
        fluct_site_avg: moments.fluct_amplitude_site_avg,
        variance_site_avg: moments.ensemble_variance_site_avg,
        budget: moments.circle_budget,
        mean_population_gate: gate(est.mean_population.iter().filter(|e| e.within(1.0 / nf, MC_GATE)).count()),
        fluct_amplitude_gate: gate(
            (0..n).filter(|&j| est.fluct_amplitude[j].within(moments.fluct_amplitude[j], MC_GATE)).count(),
        ),
        variance_gate: gate(
            (0..n).filter(|&j| est.variance[j].within(moments.ensemble_variance[j], MC_GATE)).count(),
        ),
    };
    run.out.json("rpse_summary.json", &summary)
}
