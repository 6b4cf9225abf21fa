//! Dense symmetric eigensolver: Householder reduction to tridiagonal form
//! followed by the implicit QL iteration with Wilkinson-type shifts.
//!
//! This follows the classic `tred2`/`tql2` pair. The working matrix `v` is
//! stored column-major.

#![allow(clippy::needless_range_loop)]

use crate::error::{Error, Result};

/// QL iterations allowed per eigenvalue before giving up.
pub const ITERATIONS_PER_EIGENVALUE: usize = 30;

/// Column-major n x n scratch matrix.
struct ColMajor {
    n: usize,
    data: Vec<f64>,
}

impl ColMajor {
    #[inline(always)]
    fn at(&self, row: usize, col: usize) -> f64 {
        self.data[col * self.n + row]
    }

    #[inline(always)]
    fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[col * self.n + row] = value;
    }

    #[inline(always)]
    fn col(&self, col: usize) -> &[f64] {
        &self.data[col * self.n..(col + 1) * self.n]
    }

    #[inline(always)]
    fn col_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.n..(col + 1) * self.n]
    }

    /// Two distinct columns, `a < b`, borrowed mutably at once.
    #[inline(always)]
    fn col_pair_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        debug_assert!(a < b);
        let n = self.n;
        let (left, right) = self.data.split_at_mut(b * n);
        (&mut left[a * n..(a + 1) * n], &mut right[..n])
    }
}

/// Eigen-decomposition of a symmetric matrix given in row-major order.
///
/// Returns `(eigenvalues, vectors)` where `vectors` is row-major with
/// `vectors[j * n + k]` the j-th component of the k-th eigenvector. The
/// eigenvalues are not sorted.
pub fn symmetric_eigen(n: usize, row_major: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    assert_eq!(row_major.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    // The matrix is symmetric, so reading it row-major is the same as reading
    // its transpose column-major.
    let mut v = ColMajor {
        n,
        data: row_major.to_vec(),
    };
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tridiagonalize(&mut v, &mut d, &mut e);
    ql_implicit(&mut v, &mut d, &mut e)?;

    // column k of v is eigenvector k; transpose into row-major overlaps.
    let mut out = vec![0.0; n * n];
    for k in 0..n {
        let col = v.col(k);
        for (j, &x) in col.iter().enumerate() {
            out[j * n + k] = x;
        }
    }
    Ok((d, out))
}

/// Householder reduction of `v` (lower triangle used) to a symmetric
/// tridiagonal matrix with diagonal `d` and subdiagonal `e[1..]`. On exit `v`
/// holds the accumulated orthogonal transformation.
fn tridiagonalize(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) {
    let n = v.n;
    for j in 0..n {
        d[j] = v.at(n - 1, j);
    }

    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for &x in &d[..i] {
            scale += x.abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v.at(i - 1, j);
                v.set(i, j, 0.0);
                v.set(j, i, 0.0);
            }
        } else {
            for x in &mut d[..i] {
                *x /= scale;
                h += *x * *x;
            }
            let f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for x in &mut e[..i] {
                *x = 0.0;
            }

            // e = A u restricted to the leading i x i block.
            for j in 0..i {
                let f = d[j];
                v.set(j, i, f);
                let col = v.col(j);
                let mut g = e[j] + col[j] * f;
                for k in (j + 1)..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }

            let mut f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                let f = d[j];
                let g = e[j];
                let col = v.col_mut(j);
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = col[i - 1];
                col[i] = 0.0;
            }
        }
        d[i] = h;
    }

    // Accumulate the transformations.
    for i in 0..n - 1 {
        let diag = v.at(i, i);
        v.set(n - 1, i, diag);
        v.set(i, i, 1.0);
        let h = d[i + 1];
        if h != 0.0 {
            {
                let next = v.col(i + 1);
                for k in 0..=i {
                    d[k] = next[k] / h;
                }
            }
            for j in 0..=i {
                let (cj, next) = v.col_pair_mut(j, i + 1);
                let mut g = 0.0;
                for k in 0..=i {
                    g += next[k] * cj[k];
                }
                for k in 0..=i {
                    cj[k] -= g * d[k];
                }
            }
        }
        let next = v.col_mut(i + 1);
        for x in &mut next[..=i] {
            *x = 0.0;
        }
    }
    for j in 0..n {
        d[j] = v.at(n - 1, j);
        v.set(n - 1, j, 0.0);
    }
    v.set(n - 1, n - 1, 1.0);
    e[0] = 0.0;
}

/// Implicit QL iteration on the tridiagonal matrix (d, e), applying every
/// plane rotation to the columns of `v`.
fn ql_implicit(v: &mut ColMajor, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = v.n;
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    let mut f = 0.0;
    let mut tst1 = 0.0f64;
    let eps = f64::EPSILON;
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        // e[n-1] == 0, so m < n always.
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > ITERATIONS_PER_EIGENVALUE {
                    return Err(Error::NoConvergence {
                        index: l,
                        budget: ITERATIONS_PER_EIGENVALUE,
                    });
                }

                // Shift from the leading 2x2 block.
                let g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for x in &mut d[(l + 2)..n] {
                    *x -= h;
                }
                f += h;

                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    let g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);

                    let (vi, vi1) = v.col_pair_mut(i, i + 1);
                    for (a, b) in vi.iter_mut().zip(vi1.iter_mut()) {
                        let hk = *b;
                        *b = s * *a + c * hk;
                        *a = c * *a - s * hk;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;

                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}
