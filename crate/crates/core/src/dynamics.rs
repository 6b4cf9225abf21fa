//! Unitary propagation in the eigenbasis and site populations.
//!
//! Time is the scaled time τ = tV/ħ (ħ = V = 1). A state is stored through its
//! eigenbasis amplitudes a_k = ⟨E_k|ψ⟩, so evolution only rotates phases.

use std::io::{self, Write};

use ndarray::Array2;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::spectral::EigenSystem;

/// Normalization tolerance for site distributions.
pub const NORM_TOLERANCE: f64 = 1e-10;
/// Probabilities down to this (negative) value are rounding noise and are
/// clamped to zero; anything more negative is an error.
pub const NEGATIVE_CLAMP: f64 = -1e-14;

/// Samples per parallel work item in trajectory averages. Fixed so that the
/// reduction order, and hence the result, does not depend on thread count.
const CHUNK: usize = 64;

/// Pure state in the eigenbasis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub coefficients: Vec<Complex64>,
}

impl PureState {
    pub fn norm_sqr(&self) -> f64 {
        self.coefficients.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn dim(&self) -> usize {
        self.coefficients.len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    Instantaneous,
    TimeAveraged,
    SiteAveraged,
}

/// Normalized probability distribution over the chain sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteDistribution {
    probs: Vec<f64>,
    kind: DistributionKind,
    origin: Option<usize>,
}

impl SiteDistribution {
    /// Validates and clamps: entries in [-1e-14, 0) become 0, the sum must be
    /// within 1e-10 of one.
    pub fn new(mut probs: Vec<f64>, kind: DistributionKind, origin: Option<usize>) -> Result<Self> {
        for (site, p) in probs.iter_mut().enumerate() {
            if *p < 0.0 {
                if *p < NEGATIVE_CLAMP || p.is_nan() {
                    return Err(Error::NegativeProbability { site, value: *p });
                }
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        let normalized = (sum - 1.0).abs() <= NORM_TOLERANCE;
        if !normalized {
            return Err(Error::Unnormalized { sum });
        }
        if let Some(o) = origin {
            if o >= probs.len() {
                return Err(Error::SiteOutOfRange { index: o, n: probs.len() });
            }
        }
        Ok(SiteDistribution { probs, kind, origin })
    }

    pub fn uniform(n: usize, kind: DistributionKind) -> Self {
        SiteDistribution {
            probs: vec![1.0 / n as f64; n],
            kind,
            origin: None,
        }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn origin(&self) -> Option<usize> {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn entropy(&self) -> f64 {
        entropy(&self.probs)
    }
}

/// −Σ p ln p with 0·ln 0 = 0; entries below 1e-300 count as zero.
pub fn entropy(probs: &[f64]) -> f64 {
    -probs
        .iter()
        .filter(|&&p| p > 1e-300)
        .map(|&p| p * p.ln())
        .sum::<f64>()
}

/// Signed displacement range −⌊N/2⌋ ..= ⌈N/2⌉−1.
pub fn displacement_range(n: usize) -> std::ops::RangeInclusive<i64> {
    let n = n as i64;
    -(n / 2)..=((n + 1) / 2 - 1)
}

/// Site index of `origin + displacement` with cyclic wraparound.
pub fn shifted_site(origin: usize, displacement: i64, n: usize) -> usize {
    (origin as i64 + displacement).rem_euclid(n as i64) as usize
}

/// Sampling plan for numerical time averages over [t_burn, t_max].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub t_burn: f64,
    pub t_max: f64,
    pub m: usize,
    pub jitter_seed: u64,
}

impl TimeGrid {
    pub fn new(t_burn: f64, t_max: f64, m: usize, jitter_seed: u64) -> Result<Self> {
        let grid = TimeGrid {
            t_burn,
            t_max,
            m,
            jitter_seed,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_burn.is_finite() && self.t_max.is_finite()) {
            return Err(Error::InvalidGrid("times must be finite".into()));
        }
        if !(0.0 <= self.t_burn && self.t_burn < self.t_max) {
            return Err(Error::InvalidGrid(format!(
                "need 0 <= t_burn < t_max, got t_burn = {}, t_max = {}",
                self.t_burn, self.t_max
            )));
        }
        if self.m == 0 {
            return Err(Error::InvalidGrid("at least one sample is required".into()));
        }
        Ok(())
    }

    /// Sample times: one per equal-width cell of [t_burn, t_max], placed
    /// uniformly at random inside its cell.
    pub fn sample_times(&self) -> Vec<f64> {
        let width = (self.t_max - self.t_burn) / self.m as f64;
        let mut rng = rng::stream(self.jitter_seed, Domain::TimeJitter, 0);
        (0..self.m)
            .map(|i| {
                let u: f64 = rng.random();
                self.t_burn + (i as f64 + u) * width
            })
            .collect()
    }
}

/// |ψ(0)⟩ = |j₀⟩, i.e. a_k = ⟨E_k|j₀⟩.
pub fn localized_state(eig: &EigenSystem, j0: usize) -> Result<PureState> {
    eig.check_site(j0)?;
    Ok(PureState {
        coefficients: eig.site_row(j0).iter().map(|&c| Complex64::new(c, 0.0)).collect(),
    })
}

/// a_k(t) = a_k(0) e^{−i E_k t}.
pub fn evolve(eig: &EigenSystem, psi0: &PureState, t: f64) -> Result<PureState> {
    check_dim(eig, psi0)?;
    Ok(PureState {
        coefficients: psi0
            .coefficients
            .iter()
            .zip(eig.eigenvalues())
            .map(|(a, &e)| a * Complex64::cis(-e * t))
            .collect(),
    })
}

/// ρ_j = |Σ_k ⟨j|E_k⟩ a_k|².
pub fn site_populations(eig: &EigenSystem, psi: &PureState) -> Result<SiteDistribution> {
    check_dim(eig, psi)?;
    SiteDistribution::new(raw_populations(eig, &psi.coefficients), DistributionKind::Instantaneous, None)
}

fn raw_populations(eig: &EigenSystem, amplitudes: &[Complex64]) -> Vec<f64> {
    eig.overlaps()
        .rows()
        .into_iter()
        .map(|row| {
            let (mut re, mut im) = (0.0, 0.0);
            for (c, a) in row.iter().zip(amplitudes) {
                re += c * a.re;
                im += c * a.im;
            }
            re * re + im * im
        })
        .collect()
}

/// ρ(j₀|j, t): site distribution at time t after starting on site j₀.
pub fn conditional_probability(eig: &EigenSystem, j0: usize, t: f64) -> Result<SiteDistribution> {
    let psi = evolve(eig, &localized_state(eig, j0)?, t)?;
    let dist = site_populations(eig, &psi)?;
    Ok(SiteDistribution { origin: Some(j0), ..dist })
}

/// Σ_Δj Δj² ρ(j₀|j₀+Δj) over the cyclic displacement domain.
pub fn instantaneous_mssd(dist: &SiteDistribution, j0: usize) -> Result<f64> {
    mssd_about(dist.probs(), j0)
}

pub(crate) fn mssd_about(probs: &[f64], j0: usize) -> Result<f64> {
    let n = probs.len();
    if j0 >= n {
        return Err(Error::SiteOutOfRange { index: j0, n });
    }
    Ok(displacement_range(n)
        .map(|dj| (dj * dj) as f64 * probs[shifted_site(j0, dj, n)])
        .sum())
}

/// Numerical time average of the site populations over the jittered grid.
/// Serves as an independent check of closed-form infinite-time averages.
pub fn trajectory_time_average(eig: &EigenSystem, psi0: &PureState, grid: &TimeGrid) -> Result<SiteDistribution> {
    check_dim(eig, psi0)?;
    grid.validate()?;
    let times = grid.sample_times();
    let n = eig.dim();
    let partials: Vec<Vec<f64>> = times
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = vec![0.0; n];
            let mut amps = vec![Complex64::new(0.0, 0.0); n];
            for &t in chunk {
                for ((a, a0), &e) in amps.iter_mut().zip(&psi0.coefficients).zip(eig.eigenvalues()) {
                    *a = a0 * Complex64::cis(-e * t);
                }
                for (s, p) in acc.iter_mut().zip(raw_populations(eig, &amps)) {
                    *s += p;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; n];
    for part in partials {
        for (s, p) in total.iter_mut().zip(part) {
            *s += p;
        }
    }
    let m = times.len() as f64;
    total.iter_mut().for_each(|s| *s /= m);
    SiteDistribution::new(total, DistributionKind::TimeAveraged, None)
}

/// ρ(j₀|j, t) for every origin at once, as an N x N array indexed
/// `[j0, j]`. Uses the propagator U(t) = C e^{−iEt} Cᵀ, two real matrix
/// products per call.
pub fn all_origin_populations(eig: &EigenSystem, t: f64) -> Array2<f64> {
    let c = eig.overlaps();
    let (cos, sin): (Vec<f64>, Vec<f64>) = eig
        .eigenvalues()
        .iter()
        .map(|&e| {
            let (s, c) = (-e * t).sin_cos();
            (c, s)
        })
        .unzip();
    let scaled = |phase: &[f64]| {
        let mut m = c.clone();
        for mut row in m.rows_mut() {
            row.iter_mut().zip(phase).for_each(|(x, p)| *x *= p);
        }
        m
    };
    let re = scaled(&cos).dot(&c.t());
    let im = scaled(&sin).dot(&c.t());
    let mut out = re;
    out.zip_mut_with(&im, |r, i| *r = *r * *r + i * i);
    out
}

/// {δj(t)²}: instantaneous MSSD averaged over every origin.
pub fn origin_averaged_mssd(eig: &EigenSystem, t: f64) -> f64 {
    let pops = all_origin_populations(eig, t);
    let n = eig.dim();
    pops.rows()
        .into_iter()
        .enumerate()
        .map(|(j0, row)| mssd_about(row.as_slice().expect("contiguous row"), j0).expect("origin in range"))
        .sum::<f64>()
        / n as f64
}

fn check_dim(eig: &EigenSystem, psi: &PureState) -> Result<()> {
    if psi.dim() != eig.dim() {
        return Err(Error::DimensionMismatch {
            expected: eig.dim(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// Layout of a trajectory CSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryLayout {
    /// One row per (t, j): columns `t,j,rho`.
    Long,
    /// One row per t: columns `t,rho_1,...,rho_N`.
    Wide,
}

/// Writes snapshots `(t, distribution)` with 1-based site numbers.
pub fn write_trajectory_csv<W: Write>(
    mut out: W,
    snapshots: &[(f64, SiteDistribution)],
    layout: TrajectoryLayout,
) -> io::Result<()> {
    let n = snapshots.first().map_or(0, |(_, d)| d.len());
    match layout {
        TrajectoryLayout::Long => {
            writeln!(out, "t,j,rho")?;
            for (t, d) in snapshots {
                for (j, p) in d.probs().iter().enumerate() {
                    writeln!(out, "{t},{},{p}", j + 1)?;
                }
            }
        }
        TrajectoryLayout::Wide => {
            write!(out, "t")?;
            for j in 1..=n {
                write!(out, ",rho_{j}")?;
            }
            writeln!(out)?;
            for (t, d) in snapshots {
                write!(out, "{t}")?;
                for p in d.probs() {
                    write!(out, ",{p}")?;
                }
                writeln!(out)?;
            }
        }
    }
    Ok(())
}
