//! Infinite-time averages of the localized-start dynamics and the
//! localization quantifiers built on them.
//!
//! For a nondegenerate spectrum the time average of ρ(j₀|j,t) is
//!
//! ```text
//!     ρ̄(j₀|j) = Σ_k |⟨j₀|E_k⟩|² |⟨j|E_k⟩|²
//! ```
//!
//! i.e. the (j₀, j) entry of W Wᵀ with W = C∘C. Averaging over the origin
//! j₀ at fixed cyclic displacement replaces the disorder average.

use std::io::{self, Write};

use ndarray::{s, Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    all_origin_populations, displacement_range, entropy, mssd_about, shifted_site, DistributionKind,
    SiteDistribution, TimeGrid,
};
use crate::error::{Error, Result};
use crate::spectral::EigenSystem;

/// Origins handled per block of the W Wᵀ product.
const ORIGIN_BLOCK: usize = 64;
/// Time samples per work item in the average-of-entropy mode.
const TIME_CHUNK: usize = 8;

/// ρ̄(j₀|j) for one origin.
pub fn time_avg_conditional(eig: &EigenSystem, j0: usize) -> Result<SiteDistribution> {
    eig.check_site(j0)?;
    eig.require_nondegenerate()?;
    let c = eig.overlaps();
    let w0: Vec<f64> = c.row(j0).iter().map(|x| x * x).collect();
    let probs = c
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(&w0).map(|(x, w)| x * x * w).sum())
        .collect();
    SiteDistribution::new(probs, DistributionKind::TimeAveraged, Some(j0))
}

/// Equilibrium profile for every origin plus its origin average.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumProfile {
    /// ρ̄(j₀|j) indexed `[j0, j]`.
    pub per_origin: Array2<f64>,
    /// {ρ̄}(Δj) indexed by cyclic displacement `Δj mod N`.
    pub displacement_avg: Vec<f64>,
}

impl EquilibriumProfile {
    pub fn dim(&self) -> usize {
        self.displacement_avg.len()
    }

    /// {ρ̄}(Δj) for a signed displacement.
    pub fn at(&self, displacement: i64) -> f64 {
        self.displacement_avg[shifted_site(0, displacement, self.dim())]
    }

    /// `(Δj, {ρ̄}(Δj))` over the signed displacement domain.
    pub fn signed(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        displacement_range(self.dim()).map(move |dj| (dj, self.at(dj)))
    }

    pub fn origin_distribution(&self, j0: usize) -> Result<SiteDistribution> {
        if j0 >= self.dim() {
            return Err(Error::SiteOutOfRange { index: j0, n: self.dim() });
        }
        SiteDistribution::new(self.per_origin.row(j0).to_vec(), DistributionKind::TimeAveraged, Some(j0))
    }

    /// Columns `delta_j,rho_bar`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "delta_j,rho_bar")?;
        for (dj, p) in self.signed() {
            writeln!(out, "{dj},{p}")?;
        }
        Ok(())
    }
}

/// Runs `f` on consecutive blocks of rows of ρ̄ = W Wᵀ; returns the
/// per-block results in block order.
fn map_origin_blocks<T, F>(eig: &EigenSystem, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize, ArrayView2<'_, f64>) -> T + Sync,
{
    let w = eig.weights();
    let n = eig.dim();
    let starts: Vec<usize> = (0..n).step_by(ORIGIN_BLOCK).collect();
    starts
        .par_iter()
        .map(|&start| {
            let end = (start + ORIGIN_BLOCK).min(n);
            let block = w.slice(s![start..end, ..]).dot(&w.t());
            f(start, block.view())
        })
        .collect()
}

pub fn displacement_profile(eig: &EigenSystem) -> Result<EquilibriumProfile> {
    eig.require_nondegenerate()?;
    let n = eig.dim();
    let blocks = map_origin_blocks(eig, |start, block| (start, block.to_owned()));
    let mut per_origin = Array2::zeros((n, n));
    for (start, block) in blocks {
        per_origin.slice_mut(s![start..start + block.nrows(), ..]).assign(&block);
    }
    let mut displacement_avg = vec![0.0; n];
    for (j0, row) in per_origin.rows().into_iter().enumerate() {
        for (d, acc) in displacement_avg.iter_mut().enumerate() {
            *acc += row[(j0 + d) % n];
        }
    }
    displacement_avg.iter_mut().for_each(|x| *x /= n as f64);
    Ok(EquilibriumProfile {
        per_origin,
        displacement_avg,
    })
}

/// Σ_Δj Δj² {ρ̄}(Δj).
pub fn equilibrium_mssd(profile: &EquilibriumProfile) -> f64 {
    profile.signed().map(|(dj, p)| (dj * dj) as f64 * p).sum()
}

/// IPR(k) = Σ_j |⟨j|E_k⟩|⁴ for every eigenstate.
pub fn eigenstate_ipr(eig: &EigenSystem) -> Vec<f64> {
    eig.overlaps()
        .columns()
        .into_iter()
        .map(|col| col.iter().map(|c| c.powi(4)).sum())
        .collect()
}

/// {IPR} = (1/N) Σ_k IPR(k).
pub fn mean_ipr(eig: &EigenSystem) -> f64 {
    eigenstate_ipr(eig).iter().sum::<f64>() / eig.dim() as f64
}

/// |{ρ̄}(0) − {IPR}|, where the survival probability is summed origin by
/// origin and the IPR eigenstate by eigenstate.
pub fn survival_identity_gap(eig: &EigenSystem) -> f64 {
    let n = eig.dim() as f64;
    let survival: f64 = eig
        .overlaps()
        .rows()
        .into_iter()
        .map(|row| row.iter().map(|c| c.powi(4)).sum::<f64>())
        .sum::<f64>()
        / n;
    (survival - mean_ipr(eig)).abs()
}

/// (√{δj²}, √2/{IPR}): the two sides of the approximate participation-ratio
/// relation. No agreement is implied outside intermediate disorder.
pub fn pr_mssd_relation(eig: &EigenSystem) -> Result<(f64, f64)> {
    let mssd = equilibrium_mssd(&displacement_profile(eig)?);
    Ok((mssd.sqrt(), 2f64.sqrt() / mean_ipr(eig)))
}

/// Order of time and entropy averaging in the effective-state count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyMode {
    /// Entropy of the time-averaged distribution ρ̄(j₀|·).
    #[default]
    EntropyOfAverage,
    /// Time average of the entropy of ρ(j₀|·, t) on a sampling grid.
    AverageOfEntropy,
}

impl EntropyMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            EntropyMode::EntropyOfAverage => "entropy_of_average",
            EntropyMode::AverageOfEntropy => "average_of_entropy",
        }
    }
}

impl std::str::FromStr for EntropyMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "entropy_of_average" => Ok(EntropyMode::EntropyOfAverage),
            "average_of_entropy" => Ok(EntropyMode::AverageOfEntropy),
            other => Err(format!(
                "unknown entropy mode `{other}` (expected entropy_of_average or average_of_entropy)"
            )),
        }
    }
}

/// N_e with ln N_e = −(1/N) Σ_j₀ Σ_j p ln p, p being either ρ̄(j₀|j) or
/// ρ(j₀|j,t) averaged over the grid.
pub fn effective_states(eig: &EigenSystem, mode: EntropyMode, grid: Option<&TimeGrid>) -> Result<f64> {
    let n = eig.dim() as f64;
    let mean_entropy = match mode {
        EntropyMode::EntropyOfAverage => {
            eig.require_nondegenerate()?;
            map_origin_blocks(eig, |_, block| block.rows().into_iter().map(|r| row_entropy(r.iter())).sum::<f64>())
                .into_iter()
                .sum::<f64>()
                / n
        }
        EntropyMode::AverageOfEntropy => {
            let grid = grid.ok_or_else(|| Error::InvalidGrid("average_of_entropy needs a time grid".into()))?;
            grid.validate()?;
            let times = grid.sample_times();
            let partials: Vec<f64> = times
                .par_chunks(TIME_CHUNK)
                .map(|chunk| {
                    chunk
                        .iter()
                        .map(|&t| {
                            all_origin_populations(eig, t)
                                .rows()
                                .into_iter()
                                .map(|r| row_entropy(r.iter()))
                                .sum::<f64>()
                        })
                        .sum::<f64>()
                })
                .collect();
            partials.into_iter().sum::<f64>() / (n * times.len() as f64)
        }
    };
    Ok(mean_entropy.exp())
}

fn row_entropy<'a>(row: impl Iterator<Item = &'a f64>) -> f64 {
    -row.filter(|&&p| p > 1e-300).map(|&p| p * p.ln()).sum::<f64>()
}

/// Equilibrium localization quantifiers of one eigensystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationMetrics {
    #[serde(rename = "mssd")]
    pub equilibrium_mssd: f64,
    #[serde(rename = "ipr_mean")]
    pub mean_ipr: f64,
    pub n_effective: f64,
    pub sqrt_mssd: f64,
    pub sqrt2_over_ipr: f64,
}

/// MSSD, {IPR}, N_e and the participation-ratio pair in one pass over
/// ρ̄ without materializing the N x N profile.
pub fn localization_metrics(eig: &EigenSystem, mode: EntropyMode, grid: Option<&TimeGrid>) -> Result<LocalizationMetrics> {
    eig.require_nondegenerate()?;
    let n = eig.dim();
    let partials = map_origin_blocks(eig, |start, block| {
        let mut mssd = 0.0;
        let mut ent = 0.0;
        for (i, row) in block.rows().into_iter().enumerate() {
            let probs = row.as_slice().expect("contiguous row");
            mssd += mssd_about(probs, start + i).expect("origin in range");
            ent += entropy(probs);
        }
        (mssd, ent)
    });
    let (mssd_sum, ent_sum) = partials.into_iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
    let equilibrium_mssd = mssd_sum / n as f64;
    let n_effective = match mode {
        EntropyMode::EntropyOfAverage => (ent_sum / n as f64).exp(),
        EntropyMode::AverageOfEntropy => effective_states(eig, mode, grid)?,
    };
    let mean_ipr = mean_ipr(eig);
    Ok(LocalizationMetrics {
        equilibrium_mssd,
        mean_ipr,
        n_effective,
        sqrt_mssd: equilibrium_mssd.sqrt(),
        sqrt2_over_ipr: 2f64.sqrt() / mean_ipr,
    })
}
