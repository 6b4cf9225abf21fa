//! Cross-checks against methods that share no code with the library.

mod common;

use anderson_core::dynamics::{evolve, localized_state, site_populations};
use ndarray::Array2;
use num_complex::Complex64;

/// det(A − λI) by Gaussian elimination with partial pivoting.
fn char_poly(a: &Array2<f64>, lambda: f64) -> f64 {
    let n = a.nrows();
    let mut m = a.clone();
    for i in 0..n {
        m[[i, i]] -= lambda;
    }
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&x, &y| m[[x, col]].abs().total_cmp(&m[[y, col]].abs()))
            .unwrap();
        if m[[pivot, col]] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                m.swap([pivot, k], [col, k]);
            }
            det = -det;
        }
        det *= m[[col, col]];
        for r in (col + 1)..n {
            let f = m[[r, col]] / m[[col, col]];
            for k in col..n {
                m[[r, k]] -= f * m[[col, k]];
            }
        }
    }
    det
}

fn roots_by_bisection(a: &Array2<f64>, bound: f64, cells: usize) -> Vec<f64> {
    let step = 2.0 * bound / cells as f64;
    let mut roots = Vec::new();
    let mut lo = -bound;
    let mut f_lo = char_poly(a, lo);
    for i in 1..=cells {
        let hi = -bound + i as f64 * step;
        let f_hi = char_poly(a, hi);
        if f_lo.signum() != f_hi.signum() {
            let (mut l, mut h, mut fl) = (lo, hi, f_lo);
            for _ in 0..200 {
                let mid = 0.5 * (l + h);
                let fm = char_poly(a, mid);
                if fm.signum() == fl.signum() {
                    l = mid;
                    fl = fm;
                } else {
                    h = mid;
                }
            }
            roots.push(0.5 * (l + h));
        }
        lo = hi;
        f_lo = f_hi;
    }
    roots
}

#[test]
fn eigenvalues_match_characteristic_polynomial_roots() {
    for (sigma, seed) in [(0.5, 1), (1.0, 2), (3.0, 3), (0.24, 4)] {
        let (h, eig) = common::chain(6, sigma, seed);
        let bound = 2.0 + h.matrix().diag().iter().map(|x| x.abs()).fold(0.0, f64::max) + 1.0;
        let roots = roots_by_bisection(h.matrix(), bound, 40_000);
        assert_eq!(roots.len(), 6, "sigma={sigma}: {roots:?}");
        for (r, e) in roots.iter().zip(eig.eigenvalues()) {
            assert!((r - e).abs() < 1e-8, "sigma={sigma}: root {r} vs {e}");
        }
    }
}

/// Classical RK4 on i dψ/dt = Hψ in the site basis.
fn rk4_site_populations(h: &Array2<f64>, j0: usize, t: f64, dt: f64) -> Vec<f64> {
    let n = h.nrows();
    let mut psi = vec![Complex64::new(0.0, 0.0); n];
    psi[j0] = Complex64::new(1.0, 0.0);
    let deriv = |v: &[Complex64]| -> Vec<Complex64> {
        (0..n)
            .map(|i| {
                let hv: Complex64 = (0..n).map(|k| v[k] * h[[i, k]]).sum();
                Complex64::new(0.0, -1.0) * hv
            })
            .collect()
    };
    let axpy = |v: &[Complex64], d: &[Complex64], s: f64| -> Vec<Complex64> {
        v.iter().zip(d).map(|(a, b)| a + b * s).collect()
    };
    let steps = (t / dt).round() as usize;
    let dt = t / steps as f64;
    for _ in 0..steps {
        let k1 = deriv(&psi);
        let k2 = deriv(&axpy(&psi, &k1, dt / 2.0));
        let k3 = deriv(&axpy(&psi, &k2, dt / 2.0));
        let k4 = deriv(&axpy(&psi, &k3, dt));
        for i in 0..n {
            psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
        }
    }
    psi.iter().map(|z| z.norm_sqr()).collect()
}

#[test]
fn spectral_propagation_matches_rk4() {
    let (h, eig) = common::chain(8, 0.5, 11);
    let t = 3.7;
    for j0 in [0, 5] {
        let reference = rk4_site_populations(h.matrix(), j0, t, 1e-4);
        let psi = evolve(&eig, &localized_state(&eig, j0).unwrap(), t).unwrap();
        let rho = site_populations(&eig, &psi).unwrap();
        for (j, (a, b)) in rho.probs().iter().zip(&reference).enumerate() {
            assert!((a - b).abs() < 1e-6, "j0={j0} j={j}: {a} vs {b}");
        }
    }
}
