//! Alternating volume maximization over observed pixels.
//!
//! Pixels are projected onto their first `m - 1` principal components and
//! lifted to `a_i = (1, r_i)`. The simplex spanned by `m` pixels has volume
//! `|det[a_e1 .. a_em]| / (m-1)!`, which is affine in any single column, so
//! each partial maximization (all endmembers fixed but one) is an exact scan
//! of `|c . a_i|` over pixels, with `c` the cofactors of the free column.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::seq::index::sample;
use rayon::prelude::*;

use super::noise::centered;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng;

/// Full cycles allowed per replicate.
pub const MAX_CYCLES: usize = 100;

#[derive(Debug, Clone)]
pub struct AvmaxReplicate {
    pub indices: Vec<usize>,
    pub log_volume: f64,
    /// Simplex volume after the initial draw and after every partial
    /// maximization step.
    pub volume_trace: Vec<f64>,
    pub cycles: usize,
}

#[derive(Debug, Clone)]
pub struct AvmaxResult {
    pub m: usize,
    /// Pixel indices of the winning endmembers.
    pub indices: Vec<usize>,
    /// Row-major `m x dim` endmember spectra (the selected pixels).
    pub endmembers: Vec<f64>,
    pub volume: f64,
    pub best_replicate: usize,
    pub replicates: Vec<AvmaxReplicate>,
}

impl AvmaxResult {
    pub fn replicate_volumes(&self) -> Vec<f64> {
        self.replicates.iter().map(|r| r.log_volume.exp()).collect()
    }
}

/// Pixels projected on the leading `m - 1` principal axes, lifted with a
/// leading 1. Row-major `n x m`.
pub(crate) fn lifted_pca(cloud: &PointCloud, m: usize) -> Result<Vec<f64>> {
    let z = centered(cloud);
    let cov = (z.transpose() * &z) / cloud.len() as f64;
    let eig = SymmetricEigen::new((&cov + cov.transpose()) * 0.5);
    let mut order: Vec<usize> = (0..cloud.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = eig.eigenvalues[order[0]].max(0.0);
    if m >= 2 {
        let last = eig.eigenvalues[order[m - 2]];
        if top <= 0.0 || last <= 1e-12 * top {
            return Err(Error::Degenerate(format!(
                "{m} endmembers need {} affine dimensions, data has fewer",
                m - 1
            )));
        }
    }
    let mut lifted = Vec::with_capacity(cloud.len() * m);
    for i in 0..cloud.len() {
        lifted.push(1.0);
        for &k in &order[..m - 1] {
            lifted.push(z.row(i).dot(&eig.eigenvectors.column(k).transpose()));
        }
    }
    Ok(lifted)
}

fn factorial_ln(k: usize) -> f64 {
    (2..=k).map(|v| (v as f64).ln()).sum()
}

fn det(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        1.0
    } else {
        m.clone().lu().determinant()
    }
}

/// Cofactors of column `col` in the `m x m` matrix whose columns are the
/// lifted pixels `cols`.
fn cofactors(lifted: &[f64], m: usize, cols: &[usize], col: usize) -> Vec<f64> {
    (0..m)
        .map(|row| {
            let minor = DMatrix::from_fn(m - 1, m - 1, |r, c| {
                let rr = if r < row { r } else { r + 1 };
                let cc = if c < col { c } else { c + 1 };
                lifted[cols[cc] * m + rr]
            });
            let sign = if (row + col) % 2 == 0 { 1.0 } else { -1.0 };
            sign * det(&minor)
        })
        .collect()
}

fn abs_det(lifted: &[f64], m: usize, cols: &[usize]) -> f64 {
    let mat = DMatrix::from_fn(m, m, |r, c| lifted[cols[c] * m + r]);
    det(&mat).abs()
}

fn run_replicate(lifted: &[f64], n: usize, m: usize, seed: u64, replicate: usize) -> AvmaxReplicate {
    let mut gen = rng::stream(seed, replicate as u64);
    let mut indices: Vec<usize> = sample(&mut gen, n, m).into_vec();
    let norm = factorial_ln(m - 1).exp();
    let mut trace = vec![abs_det(lifted, m, &indices) / norm];
    let mut cycles = 0;
    while cycles < MAX_CYCLES {
        cycles += 1;
        let mut improved = false;
        for j in 0..m {
            let c = cofactors(lifted, m, &indices, j);
            let score = |i: usize| -> f64 {
                c.iter().zip(&lifted[i * m..(i + 1) * m]).map(|(a, b)| a * b).sum::<f64>().abs()
            };
            let held = score(indices[j]);
            let (best, best_val) = (0..n).fold((indices[j], held), |(bi, bv), i| {
                let v = score(i);
                if v > bv {
                    (i, v)
                } else {
                    (bi, bv)
                }
            });
            // Relative margin keeps rounding from registering as progress.
            if best != indices[j] && best_val > held * (1.0 + 1e-12) {
                indices[j] = best;
                improved = true;
            }
            trace.push(abs_det(lifted, m, &indices) / norm);
        }
        if !improved {
            break;
        }
    }
    let final_det = abs_det(lifted, m, &indices);
    AvmaxReplicate {
        indices,
        log_volume: final_det.ln() - factorial_ln(m - 1),
        volume_trace: trace,
        cycles,
    }
}

pub fn avmax(cloud: &PointCloud, m: usize, replicates: usize, seed: u64) -> Result<AvmaxResult> {
    let (n, d) = (cloud.len(), cloud.dim());
    if m < 2 || m > n || m > d + 1 {
        return Err(Error::param(format!(
            "endmember count must satisfy 2 <= m <= min(n, dim + 1) = {}, got {m}",
            n.min(d + 1)
        )));
    }
    if replicates == 0 {
        return Err(Error::param("need at least one replicate"));
    }
    let lifted = lifted_pca(cloud, m)?;
    let runs: Vec<AvmaxReplicate> = (0..replicates)
        .into_par_iter()
        .map(|r| run_replicate(&lifted, n, m, seed, r))
        .collect();
    let mut best = 0;
    for (r, run) in runs.iter().enumerate() {
        if run.log_volume > runs[best].log_volume {
            best = r;
        }
    }
    let winner = &runs[best];
    if !winner.log_volume.is_finite() {
        return Err(Error::Degenerate("every replicate converged to a zero-volume simplex".into()));
    }
    let indices = winner.indices.clone();
    let endmembers = indices.iter().flat_map(|&i| cloud.row(i).iter().copied()).collect();
    Ok(AvmaxResult {
        m,
        indices,
        endmembers,
        volume: winner.log_volume.exp(),
        best_replicate: best,
        replicates: runs,
    })
}
