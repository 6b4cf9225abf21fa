use anderson_core::chain::{build_hamiltonian, sample_disorder, ChainSpec};
use anderson_core::spectral::{diagonalize, residual_report};
use std::time::Instant;

fn main() {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(1000);
    let spec = ChainSpec::new(n, 0.5, 1).unwrap();
    let h = build_hamiltonian(&sample_disorder(&spec, 0).unwrap()).unwrap();
    let t = Instant::now();
    let eig = diagonalize(&h).unwrap();
    println!("diagonalize n={n}: {:?}", t.elapsed());
    let t = Instant::now();
    let r = residual_report(&h, &eig).unwrap();
    println!("residuals: {:?} in {:?}", r, t.elapsed());
}
