//! Random pure state ensemble (infinite-temperature limit).
//!
//! A state is |ψ⟩ = Σ_k √P_k e^{iα_k} |E_k⟩ with phases uniform on the torus
//! and populations uniform on the simplex. With S_j = Σ_k |⟨j|E_k⟩|⁴ the
//! ensemble moments of the site populations are
//!
//! ```text
//!     ⟨ρ̄_j⟩         = 1/N
//!     ⟨Δρ_j²⟩‾      = (1 − S_j) / (N(N+1))      time fluctuations
//!     σ_j²          = (S_j − 1/N) / (N(N+1))    ensemble variance
//! ```
//!
//! and the last two always add up to (N−1)/(N²(N+1)).

use std::f64::consts::TAU;
use std::io::{self, Write};

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{DistributionKind, PureState, SiteDistribution};
use crate::equilibrium::mean_ipr;
use crate::error::{Error, Result};
use crate::rng::{self, Domain};
use crate::spectral::EigenSystem;

/// Monte Carlo samples per parallel batch. Each batch owns one random stream.
const MC_BATCH: usize = 256;

/// Eigenstate populations and phases of one random pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct RpseState {
    pub populations: Vec<f64>,
    pub phases: Vec<f64>,
}

impl RpseState {
    pub fn to_pure_state(&self) -> PureState {
        PureState {
            coefficients: self
                .populations
                .iter()
                .zip(&self.phases)
                .map(|(&p, &a)| Complex64::from_polar(p.sqrt(), a))
                .collect(),
        }
    }
}

/// Draws a state from the ensemble.
///
/// Populations are the spacings of N−1 sorted uniforms on [0, 1) augmented
/// with 0 and 1, which is exactly uniform on the simplex. The N phases are
/// drawn afterwards, uniform on [0, 2π).
pub fn sample_rpse<R: Rng + ?Sized>(n: usize, rng: &mut R) -> RpseState {
    assert!(n >= 1, "state dimension must be positive");
    let mut cuts: Vec<f64> = (0..n - 1).map(|_| rng.random::<f64>()).collect();
    cuts.sort_by(f64::total_cmp);
    let mut populations = Vec::with_capacity(n);
    let mut prev = 0.0;
    for &c in &cuts {
        populations.push(c - prev);
        prev = c;
    }
    populations.push(1.0 - prev);
    let phases = (0..n).map(|_| TAU * rng.random::<f64>()).collect();
    RpseState { populations, phases }
}

fn check_state(eig: &EigenSystem, state: &RpseState) -> Result<()> {
    if state.populations.len() != eig.dim() {
        return Err(Error::DimensionMismatch {
            expected: eig.dim(),
            found: state.populations.len(),
        });
    }
    Ok(())
}

/// ρ̄_j = Σ_k P_k |⟨j|E_k⟩|². Phases drop out of the time average.
pub fn state_time_avg_populations(eig: &EigenSystem, state: &RpseState) -> Result<SiteDistribution> {
    check_state(eig, state)?;
    eig.require_nondegenerate()?;
    SiteDistribution::new(
        weighted_rows(eig, &state.populations, |c| c * c),
        DistributionKind::TimeAveraged,
        None,
    )
}

fn weighted_rows(eig: &EigenSystem, weights: &[f64], f: impl Fn(f64) -> f64) -> Vec<f64> {
    eig.overlaps()
        .rows()
        .into_iter()
        .map(|row| row.iter().zip(weights).map(|(&c, w)| f(c) * w).sum())
        .collect()
}

/// Time average of (ρ_j(t) − ρ̄_j)² for one state:
/// Σ_{k≠k'} P_k P_k' |⟨j|E_k⟩|² |⟨j|E_k'⟩|².
///
/// Valid when the energy gaps E_k − E_k' are nondegenerate; check with
/// [`crate::spectral::audit_spectrum`] where that matters.
pub fn state_fluctuation_amplitude(eig: &EigenSystem, state: &RpseState, j: usize) -> Result<f64> {
    check_state(eig, state)?;
    eig.check_site(j)?;
    let (linear, square) = eig
        .site_row(j)
        .iter()
        .zip(&state.populations)
        .fold((0.0, 0.0), |(l, s), (&c, &p)| {
            let x = p * c * c;
            (l + x, s + x * x)
        });
    Ok((linear * linear - square).max(0.0))
}

fn site_ipr(eig: &EigenSystem, j: usize) -> f64 {
    eig.site_row(j).iter().map(|c| c.powi(4)).sum()
}

fn ensemble_scale(n: usize) -> f64 {
    let n = n as f64;
    1.0 / (n * (n + 1.0))
}

/// (N−1)/(N²(N+1)).
pub fn circle_budget(n: usize) -> f64 {
    let nf = n as f64;
    (nf - 1.0) / (nf * nf * (nf + 1.0))
}

/// ⟨Δρ_j²⟩‾ = (1 − S_j)/(N(N+1)).
pub fn ensemble_fluctuation_amplitude(eig: &EigenSystem, j: usize) -> Result<f64> {
    eig.check_site(j)?;
    Ok((1.0 - site_ipr(eig, j)) * ensemble_scale(eig.dim()))
}

/// σ_j² = (S_j − 1/N)/(N(N+1)).
pub fn ensemble_variance(eig: &EigenSystem, j: usize) -> Result<f64> {
    eig.check_site(j)?;
    Ok((site_ipr(eig, j) - 1.0 / eig.dim() as f64) * ensemble_scale(eig.dim()))
}

/// Closed-form ensemble moments for every site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleMoments {
    pub mean_population: f64,
    pub fluct_amplitude: Vec<f64>,
    pub fluct_amplitude_site_avg: f64,
    pub ensemble_variance: Vec<f64>,
    pub ensemble_variance_site_avg: f64,
    pub circle_budget: f64,
}

impl EnsembleMoments {
    /// Columns `j,fluct_amplitude,ensemble_variance,budget`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "j,fluct_amplitude,ensemble_variance,budget")?;
        for (j, (f, v)) in self.fluct_amplitude.iter().zip(&self.ensemble_variance).enumerate() {
            writeln!(out, "{},{f},{v},{}", j + 1, self.circle_budget)?;
        }
        Ok(())
    }
}

pub fn ensemble_moments(eig: &EigenSystem) -> EnsembleMoments {
    let n = eig.dim();
    let scale = ensemble_scale(n);
    let s: Vec<f64> = (0..n).map(|j| site_ipr(eig, j)).collect();
    let fluct: Vec<f64> = s.iter().map(|sj| (1.0 - sj) * scale).collect();
    let var: Vec<f64> = s.iter().map(|sj| (sj - 1.0 / n as f64) * scale).collect();
    let law = circle_law(eig);
    EnsembleMoments {
        mean_population: 1.0 / n as f64,
        fluct_amplitude: fluct,
        fluct_amplitude_site_avg: law.site_avg_fluct,
        ensemble_variance: var,
        ensemble_variance_site_avg: law.site_avg_var,
        circle_budget: law.budget,
    }
}

/// Site-averaged fluctuation amplitude and ensemble variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleLaw {
    pub site_avg_fluct: f64,
    pub site_avg_var: f64,
    pub budget: f64,
    pub ipr_mean: f64,
}

impl CircleLaw {
    /// Both components from a mean IPR; they are affine in it.
    pub fn from_mean_ipr(n: usize, ipr_mean: f64) -> Self {
        let scale = ensemble_scale(n);
        CircleLaw {
            site_avg_fluct: (1.0 - ipr_mean) * scale,
            site_avg_var: (ipr_mean - 1.0 / n as f64) * scale,
            budget: circle_budget(n),
            ipr_mean,
        }
    }

    /// |fluct + var − budget|.
    pub fn defect(&self) -> f64 {
        (self.site_avg_fluct + self.site_avg_var - self.budget).abs()
    }
}

pub fn circle_law(eig: &EigenSystem) -> CircleLaw {
    CircleLaw::from_mean_ipr(eig.dim(), mean_ipr(eig))
}

/// Monte Carlo mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl McEstimate {
    /// |value − target| in units of the standard error.
    pub fn z_score(&self, target: f64) -> f64 {
        let diff = (self.value - target).abs();
        if self.std_error > 0.0 {
            diff / self.std_error
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn within(&self, target: f64, n_std_errors: f64) -> bool {
        self.z_score(target) <= n_std_errors
    }
}

/// Per-site Monte Carlo estimates of the three ensemble moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimates {
    /// ⟨ρ̄_j⟩
    pub mean_population: Vec<McEstimate>,
    /// ⟨Δρ_j²⟩‾, averaging the per-state amplitude over sampled states.
    pub fluct_amplitude: Vec<McEstimate>,
    /// Var(ρ̄_j)
    pub variance: Vec<McEstimate>,
}

/// Streaming first-to-fourth power sums of one per-site quantity.
#[derive(Clone, Default)]
struct Sums {
    s1: Vec<f64>,
    s2: Vec<f64>,
    s3: Vec<f64>,
    s4: Vec<f64>,
}

impl Sums {
    fn new(n: usize) -> Self {
        Sums {
            s1: vec![0.0; n],
            s2: vec![0.0; n],
            s3: vec![0.0; n],
            s4: vec![0.0; n],
        }
    }

    fn push(&mut self, xs: &[f64]) {
        for (j, &x) in xs.iter().enumerate() {
            let x2 = x * x;
            self.s1[j] += x;
            self.s2[j] += x2;
            self.s3[j] += x2 * x;
            self.s4[j] += x2 * x2;
        }
    }

    fn merge(&mut self, other: &Sums) {
        for (a, b) in [
            (&mut self.s1, &other.s1),
            (&mut self.s2, &other.s2),
            (&mut self.s3, &other.s3),
            (&mut self.s4, &other.s4),
        ] {
            a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
        }
    }

    fn mean_estimates(&self, m: usize) -> Vec<McEstimate> {
        let mf = m as f64;
        self.s1
            .iter()
            .zip(&self.s2)
            .map(|(&s1, &s2)| {
                let mean = s1 / mf;
                let var = ((s2 / mf - mean * mean) * mf / (mf - 1.0)).max(0.0);
                McEstimate {
                    value: mean,
                    std_error: (var / mf).sqrt(),
                    samples: m,
                }
            })
            .collect()
    }

    /// Unbiased sample variance with the large-sample standard error
    /// sqrt((μ₄ − σ⁴)/M).
    fn variance_estimates(&self, m: usize) -> Vec<McEstimate> {
        let mf = m as f64;
        (0..self.s1.len())
            .map(|j| {
                let mean = self.s1[j] / mf;
                let e2 = self.s2[j] / mf;
                let e3 = self.s3[j] / mf;
                let e4 = self.s4[j] / mf;
                let central2 = (e2 - mean * mean).max(0.0);
                let central4 = e4 - 4.0 * mean * e3 + 6.0 * mean * mean * e2 - 3.0 * mean.powi(4);
                McEstimate {
                    value: central2 * mf / (mf - 1.0),
                    std_error: ((central4 - central2 * central2).max(0.0) / mf).sqrt(),
                    samples: m,
                }
            })
            .collect()
    }
}

/// Samples `m_samples` states and estimates ⟨ρ̄_j⟩, ⟨Δρ_j²⟩‾ and Var(ρ̄_j)
/// for every site. Batches use independent streams of `seed`, so the result
/// does not depend on the thread count.
pub fn mc_verify_moments(eig: &EigenSystem, m_samples: usize, seed: u64) -> Result<MomentEstimates> {
    if m_samples < 2 {
        return Err(Error::InvalidSpec("Monte Carlo needs at least two samples".into()));
    }
    let n = eig.dim();
    let w = eig.weights();
    let batches: Vec<usize> = (0..m_samples.div_ceil(MC_BATCH)).collect();
    let partials: Vec<(Sums, Sums)> = batches
        .par_iter()
        .map(|&b| {
            let mut rng = rng::stream(seed, Domain::MonteCarlo, b as u64);
            let count = MC_BATCH.min(m_samples - b * MC_BATCH);
            let mut pop = Sums::new(n);
            let mut fluct = Sums::new(n);
            let mut rho_bar = vec![0.0; n];
            let mut fl = vec![0.0; n];
            for _ in 0..count {
                let state = sample_rpse(n, &mut rng);
                for (j, row) in w.rows().into_iter().enumerate() {
                    let (mut lin, mut sq) = (0.0, 0.0);
                    for (&wk, &p) in row.iter().zip(&state.populations) {
                        let x = p * wk;
                        lin += x;
                        sq += x * x;
                    }
                    rho_bar[j] = lin;
                    fl[j] = (lin * lin - sq).max(0.0);
                }
                pop.push(&rho_bar);
                fluct.push(&fl);
            }
            (pop, fluct)
        })
        .collect();
    let mut pop = Sums::new(n);
    let mut fluct = Sums::new(n);
    for (p, f) in &partials {
        pop.merge(p);
        fluct.merge(f);
    }
    Ok(MomentEstimates {
        mean_population: pop.mean_estimates(m_samples),
        fluct_amplitude: fluct.mean_estimates(m_samples),
        variance: pop.variance_estimates(m_samples),
    })
}

/// Writes circle-law points as
/// `sigma_over_v,site_avg_fluct,site_avg_var,budget,ipr_mean`.
pub fn write_circle_sweep_csv<W: Write>(mut out: W, points: &[(f64, CircleLaw)]) -> io::Result<()> {
    writeln!(out, "sigma_over_v,site_avg_fluct,site_avg_var,budget,ipr_mean")?;
    for (sigma, law) in points {
        writeln!(
            out,
            "{sigma},{},{},{},{}",
            law.site_avg_fluct, law.site_avg_var, law.budget, law.ipr_mean
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::{build_hamiltonian, sample_disorder, ChainSpec, Hamiltonian};
    use crate::spectral::diagonalize;
    use ndarray::Array2;

    fn chain_eig(n: usize, sigma: f64, seed: u64) -> EigenSystem {
        let spec = ChainSpec::new(n, sigma, seed).unwrap();
        diagonalize(&build_hamiltonian(&sample_disorder(&spec, 0).unwrap()).unwrap()).unwrap()
    }

    fn rotation_fixture() -> EigenSystem {
        let r = 0.5f64.sqrt();
        EigenSystem::from_parts(vec![-1.0, 1.0], ndarray::array![[r, r], [-r, r]]).unwrap()
    }

    #[test]
    fn point_simplex() {
        let mut rng = rng::stream(1, Domain::RandomState, 0);
        let s = sample_rpse(1, &mut rng);
        assert_eq!(s.populations, vec![1.0]);
        assert!((0.0..TAU).contains(&s.phases[0]));
    }

    #[test]
    fn samples_lie_on_simplex_and_torus() {
        let mut rng = rng::stream(2, Domain::RandomState, 0);
        for n in [2, 5, 64] {
            for _ in 0..50 {
                let s = sample_rpse(n, &mut rng);
                assert!(s.populations.iter().all(|&p| p >= 0.0));
                assert!((s.populations.iter().sum::<f64>() - 1.0).abs() < 1e-12);
                assert!(s.phases.iter().all(|a| (0.0..TAU).contains(a)));
                assert!((s.to_pure_state().norm_sqr() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn stationary_states() {
        let eig = chain_eig(10, 0.5, 3);
        let mut populations = vec![0.0; 10];
        populations[0] = 1.0;
        let state = RpseState { populations, phases: vec![0.3; 10] };
        let avg = state_time_avg_populations(&eig, &state).unwrap();
        for (j, &p) in avg.probs().iter().enumerate() {
            assert!((p - eig.overlaps()[[j, 0]].powi(2)).abs() < 1e-15);
        }
        for j in 0..10 {
            assert_eq!(state_fluctuation_amplitude(&eig, &state, j).unwrap(), 0.0);
        }
        let uniform = RpseState { populations: vec![0.1; 10], phases: vec![0.0; 10] };
        let avg = state_time_avg_populations(&eig, &uniform).unwrap();
        assert!(avg.probs().iter().all(|&p| (p - 0.1).abs() < 1e-14));
    }

    #[test]
    fn two_level_rotation_values() {
        let eig = rotation_fixture();
        let state = RpseState { populations: vec![0.5, 0.5], phases: vec![0.0, 1.0] };
        assert!((state_fluctuation_amplitude(&eig, &state, 0).unwrap() - 0.125).abs() < 1e-15);
        assert!((ensemble_fluctuation_amplitude(&eig, 0).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!(ensemble_variance(&eig, 0).unwrap().abs() < 1e-15);
        assert!((circle_budget(2) - 1.0 / 12.0).abs() < 1e-16);
    }

    #[test]
    fn two_level_fluctuation_by_time_integration() {
        // ρ_1(t) = ½ + ½ cos(2t + Δα) for the π/4 rotation; its squared
        // deviation averages to 1/8 over a period.
        let eig = rotation_fixture();
        let state = RpseState { populations: vec![0.5, 0.5], phases: vec![0.0, 1.0] };
        let psi0 = state.to_pure_state();
        let steps = 20_000;
        let period = std::f64::consts::PI;
        let mut acc = 0.0;
        for i in 0..steps {
            let t = (i as f64 + 0.5) * period / steps as f64;
            let rho = crate::dynamics::site_populations(&eig, &crate::dynamics::evolve(&eig, &psi0, t).unwrap()).unwrap();
            acc += (rho.probs()[0] - 0.5).powi(2);
        }
        assert!((acc / steps as f64 - 0.125).abs() < 1e-10);
    }

    #[test]
    fn limits_of_closed_forms() {
        let eig = diagonalize(&Hamiltonian::diagonal(&[0.1, 0.7, -0.4, 1.5])).unwrap();
        let n = 4.0;
        for j in 0..4 {
            assert!(ensemble_fluctuation_amplitude(&eig, j).unwrap().abs() < 1e-16);
            assert!((ensemble_variance(&eig, j).unwrap() - (1.0 - 1.0 / n) / (n * (n + 1.0))).abs() < 1e-16);
        }
        let c = Array2::from_shape_fn((4, 4), |(j, k)| if (j & k).count_ones() % 2 == 0 { 0.5 } else { -0.5 });
        let eig = EigenSystem::from_parts(vec![0.0, 1.0, 2.0, 3.0], c).unwrap();
        for j in 0..4 {
            assert!((ensemble_fluctuation_amplitude(&eig, j).unwrap() - (1.0 - 1.0 / n) / (n * (n + 1.0))).abs() < 1e-16);
            assert!(ensemble_variance(&eig, j).unwrap().abs() < 1e-16);
        }
    }

    #[test]
    fn per_site_and_averaged_circle_law() {
        let eig = chain_eig(40, 0.9, 12);
        let m = ensemble_moments(&eig);
        for (f, v) in m.fluct_amplitude.iter().zip(&m.ensemble_variance) {
            assert!((f + v - m.circle_budget).abs() < 1e-14);
            assert!(*f >= -1e-16 && *v >= -1e-16);
        }
        let law = circle_law(&eig);
        assert!(law.defect() < 1e-14);
        let avg_f = m.fluct_amplitude.iter().sum::<f64>() / 40.0;
        assert!((avg_f - law.site_avg_fluct).abs() < 1e-15);
    }

    #[test]
    fn phases_do_not_matter_for_time_average() {
        let eig = chain_eig(12, 0.6, 1);
        let mut rng = rng::stream(5, Domain::RandomState, 0);
        let a = sample_rpse(12, &mut rng);
        let b = RpseState { phases: a.phases.iter().map(|x| (x + 1.234) % TAU).collect(), ..a.clone() };
        assert_eq!(
            state_time_avg_populations(&eig, &a).unwrap(),
            state_time_avg_populations(&eig, &b).unwrap()
        );
    }

    #[test]
    fn mc_is_deterministic_and_rejects_tiny_runs() {
        let eig = chain_eig(8, 1.0, 2);
        let a = mc_verify_moments(&eig, 600, 9).unwrap();
        let b = mc_verify_moments(&eig, 600, 9).unwrap();
        assert_eq!(a, b);
        assert!(mc_verify_moments(&eig, 1, 9).is_err());
        assert_eq!(a.mean_population[0].samples, 600);
    }

    #[test]
    fn mc_means_on_small_chain() {
        let eig = chain_eig(8, 1.0, 2);
        let est = mc_verify_moments(&eig, 10_000, 4).unwrap();
        let m = ensemble_moments(&eig);
        for j in 0..8 {
            assert!(est.mean_population[j].within(1.0 / 8.0, 3.0), "j={j} {:?}", est.mean_population[j]);
            assert!(est.fluct_amplitude[j].within(m.fluct_amplitude[j], 3.0), "j={j}");
            assert!(est.variance[j].within(m.ensemble_variance[j], 3.0), "j={j}");
        }
    }

    #[test]
    fn z_scores() {
        let e = McEstimate { value: 1.0, std_error: 0.5, samples: 10 };
        assert_eq!(e.z_score(2.0), 2.0);
        assert!(e.within(2.4, 3.0));
        let exact = McEstimate { value: 1.0, std_error: 0.0, samples: 10 };
        assert_eq!(exact.z_score(1.0), 0.0);
        assert!(!exact.within(1.1, 3.0));
    }

    #[test]
    fn moments_csv() {
        let m = ensemble_moments(&rotation_fixture());
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("j,fluct_amplitude,ensemble_variance,budget\n1,"));
        assert_eq!(text.lines().count(), 3);
    }
}
