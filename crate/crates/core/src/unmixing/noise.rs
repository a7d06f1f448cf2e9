//! Per-band noise estimation.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::Result;
use crate::graph::NeighborTable;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseMethod {
    /// Each (centered) band regressed on all other bands; residuals are noise.
    BandRegression,
    /// Difference to the nearest neighbor over `sqrt 2`; used when there are too
    /// few bands for the regression to separate signal from noise.
    NeighborDifference,
}

/// Bands at or below this count use [`NoiseMethod::NeighborDifference`].
pub const MIN_REGRESSION_BANDS: usize = 2;

#[derive(Debug, Clone)]
pub struct NoiseEstimate {
    /// Row-major `n x dim` noise estimate for the centered data.
    pub xi: Vec<f64>,
    /// `xi^T xi / n`.
    pub rn: DMatrix<f64>,
    pub method: NoiseMethod,
    /// Set when the band Gram matrix was rank deficient and the ridge
    /// fallback was used.
    pub ridge: bool,
}

/// Band means, used to center a cloud.
pub(crate) fn band_means(cloud: &PointCloud) -> Vec<f64> {
    let mut mean = vec![0.0; cloud.dim()];
    for row in cloud.rows() {
        mean.iter_mut().zip(row).for_each(|(m, v)| *m += v);
    }
    let n = cloud.len() as f64;
    mean.iter_mut().for_each(|m| *m /= n);
    mean
}

/// Centered data as an `n x dim` matrix.
pub(crate) fn centered(cloud: &PointCloud) -> DMatrix<f64> {
    let mean = band_means(cloud);
    DMatrix::from_fn(cloud.len(), cloud.dim(), |i, j| cloud.row(i)[j] - mean[j])
}

pub fn estimate_noise(cloud: &PointCloud) -> Result<NoiseEstimate> {
    let (n, d) = (cloud.len(), cloud.dim());
    let z = centered(cloud);
    let (xi, method, ridge) = if d <= MIN_REGRESSION_BANDS {
        (neighbor_difference(cloud)?, NoiseMethod::NeighborDifference, false)
    } else {
        let (xi, ridge) = band_regression(&z);
        (xi, NoiseMethod::BandRegression, ridge)
    };
    let rn = (xi.transpose() * &xi) / n as f64;
    let rn = (&rn + rn.transpose()) * 0.5;
    let mut flat = Vec::with_capacity(n * d);
    for i in 0..n {
        flat.extend(xi.row(i).iter());
    }
    Ok(NoiseEstimate {
        xi: flat,
        rn,
        method,
        ridge,
    })
}

fn neighbor_difference(cloud: &PointCloud) -> Result<DMatrix<f64>> {
    let table = NeighborTable::build(cloud, 1)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    Ok(DMatrix::from_fn(cloud.len(), cloud.dim(), |i, j| {
        let nn = table.neighbors(i, 1)[0];
        (cloud.row(i)[j] - cloud.row(nn)[j]) * s
    }))
}

/// Least-squares residual of every band on the others. Rank-deficient Gram
/// matrices get a ridge of `1e-6 * trace`, followed by iterated refinement so
/// the in-range part of the fit is not shrunk.
fn band_regression(z: &DMatrix<f64>) -> (DMatrix<f64>, bool) {
    let d = z.ncols();
    let gram = z.transpose() * z;
    let trace = gram.trace();
    let mut xi = z.clone();
    if trace <= 0.0 {
        return (xi, false);
    }
    let eig = gram.clone().symmetric_eigenvalues();
    let (lo, hi) = eig
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let ridge = lo <= 1e-12 * hi;
    let lambda = if ridge { 1e-6 * trace } else { 0.0 };

    for band in 0..d {
        let others: Vec<usize> = (0..d).filter(|&j| j != band).collect();
        let k = others.len();
        let sub = DMatrix::from_fn(k, k, |a, b| gram[(others[a], others[b])]);
        let rhs = DVector::from_fn(k, |a, _| gram[(others[a], band)]);
        let mut reg = sub.clone();
        for a in 0..k {
            reg[(a, a)] += lambda;
        }
        let Some(chol) = Cholesky::new(reg) else {
            continue;
        };
        let mut beta = chol.solve(&rhs);
        if ridge {
            for _ in 0..6 {
                let resid = &rhs - &sub * &beta;
                beta += chol.solve(&resid);
            }
        }
        for i in 0..z.nrows() {
            let fit: f64 = others.iter().zip(beta.iter()).map(|(&j, b)| z[(i, j)] * b).sum();
            xi[(i, band)] = z[(i, band)] - fit;
        }
    }
    (xi, ridge)
}
