//! Periodic tight-binding chain with Gaussian site disorder.
//!
//! Energies are measured in units of the hopping coefficient V, which is
//! therefore fixed to 1. The disorder strength is the dimensionless ratio
//! σ_ε/V.

use std::io::{self, Write};

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Domain};

/// Smallest chain accepted. For two sites both cyclic neighbours coincide.
pub const MIN_SITES: usize = 3;

/// Identity of one experiment: chain length, disorder strength and seed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainSpec {
    pub n: usize,
    pub disorder_strength: f64,
    pub seed: u64,
    #[serde(default = "unit_hopping")]
    pub hopping: f64,
}

fn unit_hopping() -> f64 {
    1.0
}

impl ChainSpec {
    pub fn new(n: usize, disorder_strength: f64, seed: u64) -> Result<Self> {
        let spec = ChainSpec {
            n,
            disorder_strength,
            seed,
            hopping: 1.0,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < MIN_SITES {
            return Err(Error::InvalidSpec(format!(
                "chain length must be at least {MIN_SITES}, got {}",
                self.n
            )));
        }
        if !(self.disorder_strength.is_finite() && self.disorder_strength >= 0.0) {
            return Err(Error::InvalidSpec(format!(
                "disorder strength must be finite and non-negative, got {}",
                self.disorder_strength
            )));
        }
        if self.hopping != 1.0 {
            return Err(Error::InvalidSpec(format!(
                "hopping is the energy unit and must be 1, got {}",
                self.hopping
            )));
        }
        Ok(())
    }

    /// Same chain and seed at a different disorder strength.
    pub fn with_disorder(&self, disorder_strength: f64) -> Result<Self> {
        ChainSpec::new(self.n, disorder_strength, self.seed)
    }
}

/// One draw of the site energies.
#[derive(Debug, Clone, PartialEq)]
pub struct DisorderRealization {
    pub energies: Vec<f64>,
    pub spec: ChainSpec,
    pub realization_index: u64,
}

impl DisorderRealization {
    /// Single-column CSV of the site energies, one per line.
    pub fn write_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "epsilon")?;
        for e in &self.energies {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }
}

/// Draws N i.i.d. site energies from N(0, σ_ε²).
///
/// The energies are `σ_ε · z_j` where `z_j` are standard normals (ziggurat
/// method of `rand_distr::StandardNormal`) from the disorder stream of
/// `(spec.seed, realization_index)`. The standard normals depend only on the
/// seed and the index, so a sweep over σ_ε reuses the same underlying draw for
/// a given realization index.
pub fn sample_disorder(spec: &ChainSpec, realization_index: u64) -> Result<DisorderRealization> {
    spec.validate()?;
    let sigma = spec.disorder_strength;
    let energies = if sigma == 0.0 {
        vec![0.0; spec.n]
    } else {
        let mut rng = rng::stream(spec.seed, Domain::Disorder, realization_index);
        (0..spec.n)
            .map(|_| {
                let z: f64 = StandardNormal.sample(&mut rng);
                sigma * z
            })
            .collect()
    };
    Ok(DisorderRealization {
        energies,
        spec: *spec,
        realization_index,
    })
}

/// Dense real symmetric Hamiltonian in the site basis.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    matrix: Array2<f64>,
}

impl Hamiltonian {
    /// Wraps an arbitrary symmetric matrix (test fixtures, external input).
    pub fn from_matrix(matrix: Array2<f64>) -> Result<Self> {
        let (rows, cols) = matrix.dim();
        if rows != cols {
            return Err(Error::DimensionMismatch {
                expected: rows,
                found: cols,
            });
        }
        let mut asym = 0.0f64;
        for i in 0..rows {
            for j in 0..i {
                asym = asym.max((matrix[[i, j]] - matrix[[j, i]]).abs());
            }
        }
        if asym > 0.0 {
            return Err(Error::NotSymmetric(asym));
        }
        Ok(Hamiltonian { matrix })
    }

    /// Diagonal matrix of the given energies (no hopping).
    pub fn diagonal(energies: &[f64]) -> Self {
        Hamiltonian {
            matrix: Array2::from_diag(&ndarray::ArrayView1::from(energies)),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &Array2<f64> {
        &self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.diag().sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.iter().map(|x| x * x).sum::<f64>().sqrt()
    }
}

/// Builds H_{jj'} = ε_j δ_{jj'} + V δ_{j,j'+1} + V δ_{j,j'-1} with cyclic
/// site indices, including the corner elements H_{1N} = H_{N1} = V.
pub fn build_hamiltonian(realization: &DisorderRealization) -> Result<Hamiltonian> {
    realization.spec.validate()?;
    let n = realization.energies.len();
    if n != realization.spec.n {
        return Err(Error::DimensionMismatch {
            expected: realization.spec.n,
            found: n,
        });
    }
    let v = realization.spec.hopping;
    let mut h = Array2::zeros((n, n));
    for (j, &e) in realization.energies.iter().enumerate() {
        h[[j, j]] = e;
        let next = (j + 1) % n;
        h[[j, next]] = v;
        h[[next, j]] = v;
    }
    Ok(Hamiltonian { matrix: h })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_chains_and_bad_disorder() {
        assert!(ChainSpec::new(2, 0.5, 1).is_err());
        assert!(ChainSpec::new(1, 0.5, 1).is_err());
        assert!(ChainSpec::new(3, -0.1, 1).is_err());
        assert!(ChainSpec::new(3, f64::NAN, 1).is_err());
        let mut spec = ChainSpec::new(3, 0.0, 1).unwrap();
        spec.hopping = 2.0;
        assert!(spec.validate().is_err());
    }

    #[test]
    fn zero_disorder_gives_zero_energies() {
        let spec = ChainSpec::new(4, 0.0, 99).unwrap();
        let r = sample_disorder(&spec, 0).unwrap();
        assert_eq!(r.energies, vec![0.0; 4]);
        assert!(r.energies.iter().all(|e| e.to_bits() == 0));
    }

    #[test]
    fn sampling_is_deterministic_per_index() {
        let spec = ChainSpec::new(50, 0.7, 1234).unwrap();
        let a = sample_disorder(&spec, 3).unwrap();
        let b = sample_disorder(&spec, 3).unwrap();
        let bits = |r: &DisorderRealization| r.energies.iter().map(|e| e.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        let c = sample_disorder(&spec, 4).unwrap();
        assert_ne!(bits(&a), bits(&c));
    }

    #[test]
    fn gaussian_moments_at_large_n() {
        let n = 100_000;
        let sigma = 0.24;
        let spec = ChainSpec::new(n, sigma, 2024).unwrap();
        let r = sample_disorder(&spec, 0).unwrap();
        let mean = r.energies.iter().sum::<f64>() / n as f64;
        let var = r.energies.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * sigma / (n as f64).sqrt(), "mean {mean}");
        assert!((var.sqrt() - sigma).abs() < 0.02 * sigma, "std {}", var.sqrt());
    }

    #[test]
    fn clean_ring_matrix() {
        let spec = ChainSpec::new(4, 0.0, 0).unwrap();
        let h = build_hamiltonian(&sample_disorder(&spec, 0).unwrap()).unwrap();
        let expected = ndarray::array![
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0],
            [0.0, 1.0, 0.0, 1.0],
            [1.0, 0.0, 1.0, 0.0]
        ];
        assert_eq!(h.matrix(), &expected);
    }

    #[test]
    fn row_structure_and_trace() {
        for n in [3usize, 7, 20] {
            let spec = ChainSpec::new(n, 1.3, 5).unwrap();
            let r = sample_disorder(&spec, 2).unwrap();
            let h = build_hamiltonian(&r).unwrap();
            assert_eq!(h.trace(), r.energies.iter().sum::<f64>());
            for i in 0..n {
                let hops = (0..n).filter(|&j| j != i && h.matrix()[[i, j]] == 1.0).count();
                let others = (0..n).filter(|&j| j != i && h.matrix()[[i, j]] != 1.0 && h.matrix()[[i, j]] != 0.0).count();
                assert_eq!(hops, 2);
                assert_eq!(others, 0);
                assert_eq!(h.matrix()[[i, i]], r.energies[i]);
            }
            assert!(Hamiltonian::from_matrix(h.matrix().clone()).is_ok());
        }
    }

    #[test]
    fn spec_json_round_trip() {
        let spec = ChainSpec::new(1000, 0.24, 42).unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        for key in ["\"n\"", "\"disorder_strength\"", "\"seed\"", "\"hopping\""] {
            assert!(json.contains(key));
        }
        let back: ChainSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn energies_csv() {
        let spec = ChainSpec::new(3, 0.0, 0).unwrap();
        let mut buf = Vec::new();
        sample_disorder(&spec, 0).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "epsilon\n0\n0\n0\n");
    }
}
