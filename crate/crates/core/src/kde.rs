//! Nearest-neighbor Gaussian kernel density estimate.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::graph::NeighborTable;

/// `p(x) = (1/Z) sum_{y in NN_N(x)} exp(-|x - y|^2 / sigma0^2)`, normalized
/// so that `sum p = 1`.
#[derive(Debug, Clone)]
pub struct DensityField {
    p: Vec<f64>,
    log_kernel_sums: Vec<f64>,
    sigma0: f64,
    n_neighbors: usize,
}

impl DensityField {
    pub fn values(&self) -> &[f64] {
        &self.p
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn n_neighbors(&self) -> usize {
        self.n_neighbors
    }

    /// Unnormalized log kernel sums `log sum_y exp(-d^2/sigma0^2)`.
    pub fn log_kernel_sums(&self) -> &[f64] {
        &self.log_kernel_sums
    }

    pub fn len(&self) -> usize {
        self.p.len()
    }

    pub fn is_empty(&self) -> bool {
        self.p.is_empty()
    }
}

pub fn kde(cloud: &PointCloud, n_neighbors: usize, sigma0: f64) -> Result<DensityField> {
    let table = NeighborTable::build(cloud, n_neighbors)?;
    kde_from_neighbors(&table, n_neighbors, sigma0)
}

/// KDE over the first `n_neighbors` columns of a neighbor table.
pub fn kde_from_neighbors(table: &NeighborTable, n_neighbors: usize, sigma0: f64) -> Result<DensityField> {
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::param(format!("sigma0 must be positive, got {sigma0}")));
    }
    if n_neighbors == 0 || n_neighbors > table.k() {
        return Err(Error::param(format!(
            "KDE neighbor count {n_neighbors} outside 1..={}",
            table.k()
        )));
    }
    let s2 = sigma0 * sigma0;
    let log_kernel_sums: Vec<f64> = (0..table.len())
        .map(|i| log_sum_exp(table.sq_distances(i, n_neighbors).iter().map(|d| -d / s2)))
        .collect();
    let top = log_kernel_sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let weights: Vec<f64> = log_kernel_sums.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = weights.iter().sum();
    let p = weights.iter().map(|w| (w / total).max(f64::MIN_POSITIVE)).collect();
    Ok(DensityField {
        p,
        log_kernel_sums,
        sigma0,
        n_neighbors,
    })
}

fn log_sum_exp(it: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|v| (v - m).exp()).sum::<f64>().ln()
}
