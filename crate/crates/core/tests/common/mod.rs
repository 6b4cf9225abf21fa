#![allow(dead_code)]

use anderson_core::chain::{build_hamiltonian, sample_disorder, ChainSpec, Hamiltonian};
use anderson_core::spectral::{diagonalize, EigenSystem};
use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn chain(n: usize, sigma: f64, seed: u64) -> (Hamiltonian, EigenSystem) {
    let spec = ChainSpec::new(n, sigma, seed).unwrap();
    let h = build_hamiltonian(&sample_disorder(&spec, 0).unwrap()).unwrap();
    let eig = diagonalize(&h).unwrap();
    (h, eig)
}

/// Haar-ish random orthogonal matrix from modified Gram-Schmidt on a
/// Gaussian matrix, paired with distinct integer-spaced eigenvalues.
pub fn random_orthogonal(n: usize, seed: u64) -> EigenSystem {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Array2<f64> = Array2::from_shape_fn((n, n), |_| StandardNormal.sample(&mut rng));
    for k in 0..n {
        for p in 0..k {
            let dot: f64 = (0..n).map(|i| q[[i, k]] * q[[i, p]]).sum();
            for i in 0..n {
                q[[i, k]] -= dot * q[[i, p]];
            }
        }
        let norm = (0..n).map(|i| q[[i, k]].powi(2)).sum::<f64>().sqrt();
        for i in 0..n {
            q[[i, k]] /= norm;
        }
    }
    let values = (0..n).map(|k| k as f64 + 0.1 * (k * k) as f64).collect();
    EigenSystem::from_parts(values, q).unwrap()
}
