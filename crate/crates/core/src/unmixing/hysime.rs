//! Signal-subspace dimension estimation by minimum projection error.
//!
//! The centered signal estimate `y = x - xi` defines a correlation matrix
//! `Ry`; along each of its eigenvectors `e` the mean-squared error of keeping
//! `e` is `2 e^T Rn e` (noise let through) and of dropping it is `e^T Ry e`
//! (signal lost). Directions where dropping costs more than keeping form the
//! signal subspace. Because the data are centered, a `k`-dimensional
//! subspace holds an affine simplex with `k + 1` vertices, which is the
//! endmember count returned.

use nalgebra::SymmetricEigen;

use super::noise::{centered, NoiseEstimate};
use crate::cloud::PointCloud;

#[derive(Debug, Clone)]
pub struct SubspaceEstimate {
    pub endmembers: usize,
    pub subspace_dim: usize,
    /// Per-direction cost `-e^T Ry e + 2 e^T Rn e`, eigenvalue order.
    pub costs: Vec<f64>,
}

pub fn hysime(cloud: &PointCloud, noise: &NoiseEstimate) -> usize {
    hysime_detail(cloud, noise).endmembers
}

pub fn hysime_detail(cloud: &PointCloud, noise: &NoiseEstimate) -> SubspaceEstimate {
    let (n, d) = (cloud.len(), cloud.dim());
    let z = centered(cloud);
    let mut y = z.clone();
    for i in 0..n {
        for j in 0..d {
            y[(i, j)] -= noise.xi[i * d + j];
        }
    }
    let ry = (y.transpose() * &y) / n as f64;
    let ry = (&ry + ry.transpose()) * 0.5;
    let rx_trace = (z.transpose() * &z).trace() / n as f64;
    let mut rn = noise.rn.clone();
    for j in 0..d {
        rn[(j, j)] += rx_trace / d as f64 * 1e-10;
    }

    let eig = SymmetricEigen::new(ry.clone());
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let costs: Vec<f64> = order
        .iter()
        .map(|&k| {
            let e = eig.eigenvectors.column(k);
            let py = (ry.clone() * e).dot(&e);
            let pn = (rn.clone() * e).dot(&e);
            -py + 2.0 * pn
        })
        .collect();
    // Variance below the rounding level of the raw values is not signal.
    let floor = f64::EPSILON * cloud.data().iter().map(|v| v * v).sum::<f64>() / (n * d) as f64;
    let subspace_dim = costs.iter().filter(|&&c| c < -floor).count();
    SubspaceEstimate {
        endmembers: subspace_dim + 1,
        subspace_dim,
        costs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::unmixing::estimate_noise;

    #[test]
    fn constant_cloud_has_one_endmember() {
        let rows = vec![vec![0.3, 0.1, 0.9, 0.2]; 50];
        let c = PointCloud::from_rows(&rows).unwrap();
        let noise = estimate_noise(&c).unwrap();
        assert_eq!(hysime(&c, &noise), 1);
    }
}
