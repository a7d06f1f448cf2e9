//! Active-set nonnegative least squares (Lawson-Hanson).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub coefficients: Vec<f64>,
    /// `||sum_j a_j u_j - x||_2`.
    pub residual: f64,
    pub iterations: usize,
}

/// Solves `min_{a >= 0} ||x - sum_j a_j u_j||^2` where `u_j` are the rows of
/// the row-major `m x dim` matrix `endmembers`.
pub fn nnls(endmembers: &[f64], m: usize, x: &[f64]) -> Result<NnlsSolution> {
    let dim = x.len();
    if m == 0 || endmembers.len() != m * dim {
        return Err(Error::param(format!(
            "endmember matrix of length {} does not match {m} x {dim}",
            endmembers.len()
        )));
    }
    // Columns are endmembers.
    let a = DMatrix::from_fn(dim, m, |r, c| endmembers[c * dim + r]);
    let b = DVector::from_column_slice(x);
    solve(&a, &b)
}

pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<NnlsSolution> {
    let m = a.ncols();
    let scale = 1.0 + a.norm() * b.norm();
    let tol = 1e-13 * scale;
    let max_iter = 30 * m + 100;

    let mut passive = vec![false; m];
    let mut x = DVector::zeros(m);
    let mut iterations = 0;
    let mut w = a.tr_mul(&(b - a * &x));

    loop {
        // Most positive dual among the active (zero) set.
        let mut entering = None;
        let mut best = tol;
        for j in 0..m {
            if !passive[j] && w[j] > best {
                best = w[j];
                entering = Some(j);
            }
        }
        let Some(j) = entering else { break };
        passive[j] = true;

        loop {
            iterations += 1;
            if iterations > max_iter {
                return Err(Error::Convergence {
                    what: "nnls",
                    iterations,
                    residual: (b - a * &x).norm(),
                });
            }
            let z = passive_solution(a, b, &passive);
            let feasible = (0..m).all(|k| !passive[k] || z[k] > 0.0);
            if feasible {
                x = z;
                break;
            }
            // Step toward z until the first passive coordinate hits zero.
            let mut alpha = 1.0f64;
            for k in 0..m {
                if passive[k] && z[k] <= 0.0 {
                    alpha = alpha.min(x[k] / (x[k] - z[k]));
                }
            }
            for k in 0..m {
                if passive[k] {
                    x[k] += alpha * (z[k] - x[k]);
                    if x[k] <= 1e-15 * scale {
                        x[k] = 0.0;
                        passive[k] = false;
                    }
                }
            }
            if !passive.iter().any(|&p| p) {
                break;
            }
        }
        w = a.tr_mul(&(b - a * &x));
        // A coordinate that re-enters with no progress would cycle; zero its
        // dual so the outer loop terminates.
        if !passive[j] {
            w[j] = 0.0;
        }
    }

    let residual = (b - a * &x).norm();
    Ok(NnlsSolution {
        coefficients: x.iter().copied().collect(),
        residual,
        iterations,
    })
}

/// Unconstrained least squares on the passive columns, zero elsewhere.
fn passive_solution(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&k| passive[k]).collect();
    let sub = a.select_columns(&cols);
    let svd = sub.svd(true, true);
    let sol = svd
        .solve(b, 1e-12 * svd.singular_values.max())
        .unwrap_or_else(|_| DVector::zeros(cols.len()));
    let mut z = DVector::zeros(passive.len());
    for (k, &c) in cols.iter().enumerate() {
        z[c] = sol[k];
    }
    z
}
