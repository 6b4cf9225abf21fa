//! Exact diagonalization of the chain Hamiltonian.
//!
//! The decomposition is always dense: the periodic corner elements make H a
//! general symmetric matrix rather than a tridiagonal one, and dense O(N^3)
//! work is cheap at the chain lengths of interest (N up to a few 10^3).

mod solver;

use std::io::{self, Write};

use ndarray::{Array2, ArrayView1};
use serde::{Deserialize, Serialize};

use crate::chain::Hamiltonian;
use crate::error::{Error, Result};

pub use solver::ITERATIONS_PER_EIGENVALUE;

/// Relative tolerance on the smallest level gap, in units of ‖H‖_F, below
/// which a spectrum is reported as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-12;

/// Default size cap for the gap-difference audit.
pub const DEFAULT_PAIR_CAP: usize = 128;

/// Eigenvalues and the site/eigenstate overlap matrix C[j][k] = ⟨j|E_k⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    eigenvalues: Vec<f64>,
    overlaps: Array2<f64>,
}

impl EigenSystem {
    /// Assembles an eigensystem from raw parts without checking
    /// orthogonality or ordering. Use [`residual_report`] to validate.
    pub fn from_parts(eigenvalues: Vec<f64>, overlaps: Array2<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if overlaps.dim() != (n, n) {
            let (r, c) = overlaps.dim();
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if r != n { r } else { c },
            });
        }
        Ok(EigenSystem {
            eigenvalues,
            overlaps,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn overlaps(&self) -> &Array2<f64> {
        &self.overlaps
    }

    /// Components ⟨j|E_k⟩ of site j on all eigenstates.
    pub fn site_row(&self, j: usize) -> ArrayView1<'_, f64> {
        self.overlaps.row(j)
    }

    /// |⟨j|E_k⟩|² for all (j, k).
    pub fn weights(&self) -> Array2<f64> {
        self.overlaps.mapv(|c| c * c)
    }

    /// ‖H‖_F recovered from the spectrum.
    pub fn frobenius_norm(&self) -> f64 {
        self.eigenvalues.iter().map(|e| e * e).sum::<f64>().sqrt()
    }

    pub(crate) fn check_site(&self, j: usize) -> Result<()> {
        if j >= self.dim() {
            return Err(Error::SiteOutOfRange {
                index: j,
                n: self.dim(),
            });
        }
        Ok(())
    }

    /// Errors if adjacent levels are closer than the degeneracy tolerance.
    pub fn require_nondegenerate(&self) -> Result<()> {
        let (min_gap, tolerance) = (min_level_gap(&self.eigenvalues), self.degeneracy_threshold());
        if min_gap < tolerance {
            return Err(Error::DegenerateSpectrum { min_gap, tolerance });
        }
        Ok(())
    }

    fn degeneracy_threshold(&self) -> f64 {
        DEGENERACY_TOLERANCE * self.frobenius_norm()
    }

    /// Eigenvalues, one per line.
    pub fn write_eigenvalues_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "energy")?;
        for e in &self.eigenvalues {
            writeln!(out, "{e}")?;
        }
        Ok(())
    }

    /// Overlap matrix row-major: one row per site, one column per eigenstate.
    pub fn write_overlaps_csv<W: Write>(&self, mut out: W) -> io::Result<()> {
        let n = self.dim();
        write!(out, "site")?;
        for k in 1..=n {
            write!(out, ",k{k}")?;
        }
        writeln!(out)?;
        for (j, row) in self.overlaps.rows().into_iter().enumerate() {
            write!(out, "{}", j + 1)?;
            for c in row {
                write!(out, ",{c}")?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Diagonalizes H, returning ascending eigenvalues and orthonormal
/// eigenvectors. Each eigenvector's largest-magnitude component is made
/// positive so that the output is a deterministic function of H.
pub fn diagonalize(h: &Hamiltonian) -> Result<EigenSystem> {
    let n = h.dim();
    let matrix = h.matrix();
    let data: Vec<f64> = match matrix.as_slice() {
        Some(s) => s.to_vec(),
        None => matrix.iter().copied().collect(),
    };
    let (values, vectors) = solver::symmetric_eigen(n, &data)?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));

    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut overlaps = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let mut pivot = 0.0f64;
        for j in 0..n {
            let c = vectors[j * n + src];
            if c.abs() > pivot.abs() {
                pivot = c;
            }
        }
        let sign = if pivot < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            overlaps[[j, dst]] = sign * vectors[j * n + src];
        }
    }
    Ok(EigenSystem {
        eigenvalues,
        overlaps,
    })
}

/// Largest eigen-residual and orthogonality defect of an eigensystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// max_k ‖H c_k − E_k c_k‖₂
    pub max_eigen_residual: f64,
    /// max_{kk'} |(CᵀC − I)_{kk'}|
    pub max_orthogonality_defect: f64,
}

pub fn residual_report(h: &Hamiltonian, eig: &EigenSystem) -> Result<ResidualReport> {
    let n = eig.dim();
    if h.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: h.dim(),
        });
    }
    let c = eig.overlaps();
    let hc = h.matrix().dot(c);
    let mut max_eigen_residual = 0.0f64;
    for (k, &e) in eig.eigenvalues().iter().enumerate() {
        let r2: f64 = hc
            .column(k)
            .iter()
            .zip(c.column(k))
            .map(|(a, b)| (a - e * b).powi(2))
            .sum();
        max_eigen_residual = max_eigen_residual.max(r2.sqrt());
    }
    let gram = c.t().dot(c);
    let mut max_orthogonality_defect = 0.0f64;
    for ((i, j), &g) in gram.indexed_iter() {
        let target = if i == j { 1.0 } else { 0.0 };
        max_orthogonality_defect = max_orthogonality_defect.max((g - target).abs());
    }
    Ok(ResidualReport {
        max_eigen_residual,
        max_orthogonality_defect,
    })
}

/// Degeneracy diagnostics of a spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumAudit {
    pub min_gap: f64,
    /// Smallest |ΔE_kk' − ΔE_mm'| over distinct level pairs; only computed
    /// when N does not exceed the pair cap.
    pub min_gap_difference: Option<f64>,
    pub degenerate: bool,
}

pub fn audit_spectrum(eig: &EigenSystem, pair_cap: usize) -> SpectrumAudit {
    let values = eig.eigenvalues();
    let min_gap = min_level_gap(values);
    let n = values.len();
    let min_gap_difference = if n <= pair_cap && n >= 3 {
        let mut gaps = Vec::with_capacity(n * (n - 1) / 2);
        for k in 0..n {
            for kp in 0..k {
                gaps.push((values[k] - values[kp]).abs());
            }
        }
        gaps.sort_by(f64::total_cmp);
        gaps.windows(2).map(|w| w[1] - w[0]).reduce(f64::min)
    } else {
        None
    };
    SpectrumAudit {
        min_gap,
        min_gap_difference,
        degenerate: min_gap < eig.degeneracy_threshold(),
    }
}

fn min_level_gap(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted
        .windows(2)
        .map(|w| w[1] - w[0])
        .reduce(f64::min)
        .unwrap_or(f64::INFINITY)
}
