//! Hyperparameter grids for neighbor count, KDE scale and diffusion time.

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::graph::NeighborTable;
use crate::spectral::SpectralDecomposition;

/// Neighbors pooled for the KDE-scale grid (fewer on small datasets).
pub const SIGMA_POOL_NEIGHBORS: usize = 1000;

/// Diffusion distance below which longer times are not searched.
pub const T_GRID_TARGET: f64 = 2e-5;

/// `count` geometrically spaced integers from `lo` to `hi`, rounded to
/// nearest and deduplicated.
pub fn n_grid(lo: usize, hi: usize, count: usize) -> Result<Vec<usize>> {
    if lo == 0 || hi < lo || count == 0 {
        return Err(Error::param(format!("invalid neighbor grid [{lo}, {hi}] x {count}")));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi as f64 / lo as f64).ln();
    let mut grid: Vec<usize> = (0..count)
        .map(|i| (lo as f64 * (ratio * i as f64 / (count - 1) as f64).exp()).round() as usize)
        .collect();
    grid.dedup();
    Ok(grid)
}

/// Neighbors used for the distance pool of an `n`-point dataset.
pub fn sigma_pool_neighbors(n: usize) -> usize {
    SIGMA_POOL_NEIGHBORS.min(n.saturating_sub(1))
}

/// Quantiles at levels `i / (count + 1)`, `i = 1..=count`, of the pooled
/// distances from every point to its nearest neighbors. Zero and repeated
/// values are dropped.
pub fn sigma_grid_from_neighbors(table: &NeighborTable, k: usize, count: usize) -> Result<Vec<f64>> {
    if count == 0 || k == 0 || k > table.k() {
        return Err(Error::param(format!("invalid sigma grid: {count} values from {k} neighbors")));
    }
    let mut pool: Vec<f64> = (0..table.len())
        .flat_map(|i| table.sq_distances(i, k).iter().map(|d| d.sqrt()))
        .collect();
    pool.sort_unstable_by(f64::total_cmp);
    let last = pool.len() - 1;
    let mut grid: Vec<f64> = (1..=count)
        .map(|i| {
            let pos = i as f64 / (count + 1) as f64 * last as f64;
            let (lo, frac) = (pos.floor() as usize, pos.fract());
            let hi = (lo + 1).min(last);
            pool[lo] + frac * (pool[hi] - pool[lo])
        })
        .filter(|&s| s > 0.0)
        .collect();
    grid.dedup();
    if grid.is_empty() {
        return Err(Error::input("all neighbor distances are zero"));
    }
    Ok(grid)
}

pub fn sigma_grid(cloud: &PointCloud, count: usize) -> Result<Vec<f64>> {
    let k = sigma_pool_neighbors(cloud.len());
    let table = NeighborTable::build(cloud, k)?;
    sigma_grid_from_neighbors(&table, k, count)
}

/// Eigenvalues this close to 1 in magnitude count as exactly 1.
const UNIT_EIGENVALUE_TOL: f64 = 1e-12;

/// Exponent `T` with `2^T` the last diffusion time searched:
/// `ceil(log2(log_{|lambda_2|}(target / min pi)))`, floored at 0.
pub fn t_exponent(lambda2: f64, min_pi: f64) -> Result<u32> {
    let l = lambda2.abs();
    if l >= 1.0 - UNIT_EIGENVALUE_TOL {
        return Err(Error::param(format!(
            "|lambda_2| = {l} leaves the diffusion time bound undefined"
        )));
    }
    if l == 0.0 {
        return Ok(0);
    }
    let steps = (T_GRID_TARGET / min_pi).ln() / l.ln();
    Ok(if steps > 1.0 { steps.log2().ceil() as u32 } else { 0 })
}

/// `{0, 1, 2, 4, ..., 2^T}`.
pub fn t_grid(dec: &SpectralDecomposition) -> Result<Vec<f64>> {
    let lambda2 = dec
        .lambda2()
        .ok_or_else(|| Error::param("diffusion time grid needs at least two eigenpairs"))?;
    let unit = dec
        .eigenvalues()
        .iter()
        .filter(|l| l.abs() >= 1.0 - UNIT_EIGENVALUE_TOL)
        .count();
    if unit > 1 {
        return Err(Error::Disconnected {
            components: unit,
            context: "the diffusion time bound needs a connected graph; search each component separately".into(),
        });
    }
    let min_pi = dec.pi().iter().copied().fold(f64::INFINITY, f64::min);
    let big_t = t_exponent(lambda2, min_pi)?;
    Ok(std::iter::once(0.0).chain((0..=big_t).map(|e| 2f64.powi(e as i32))).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_neighbor_grid() {
        assert_eq!(n_grid(10, 900, 5).unwrap(), vec![10, 31, 95, 292, 900]);
        assert_eq!(n_grid(5, 5, 3).unwrap(), vec![5]);
        assert!(n_grid(0, 5, 3).is_err());
    }

    #[test]
    fn t_exponent_formula() {
        // log_0.99(0.2) = 160.14..., log2 of that is 7.32..., so T = 8.
        assert_eq!(t_exponent(0.99, 1e-4).unwrap(), 8);
        assert_eq!(t_exponent(-0.99, 1e-4).unwrap(), 8);
        assert!(t_exponent(1.0, 1e-4).is_err());
    }
}
