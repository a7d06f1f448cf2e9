//! Per-pixel abundances and purity.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::nnls;
use crate::cloud::PointCloud;
use crate::error::{Error, Result};

/// Weight of the appended sum-to-one row, relative to the largest endmember
/// norm.
pub const SUM_TO_ONE_WEIGHT: f64 = 100.0;

#[derive(Debug, Clone)]
pub struct Abundances {
    pub m: usize,
    /// Row-major `n x m`, every row sums to 1.
    pub values: Vec<f64>,
    /// `eta_i = max_j A_ij`.
    pub purity: Vec<f64>,
    /// Pixels whose solution was all-zero and were set to `1/m`.
    pub uniform_rows: Vec<usize>,
}

impl Abundances {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.m..(i + 1) * self.m]
    }
}

/// NNLS abundances for every pixel against the row-major `m x dim`
/// endmember matrix, followed by row normalization.
///
/// The system is augmented with a weighted row of ones (target equal to the
/// weight), which drives solutions toward the sum-to-one simplex. Without it,
/// endmembers of centered data can combine to reproduce any interior pixel
/// with a sparse, high-purity code.
pub fn abundances_and_purity(cloud: &PointCloud, endmembers: &[f64], m: usize) -> Result<Abundances> {
    let dim = cloud.dim();
    if m == 0 || endmembers.len() != m * dim {
        return Err(Error::param(format!(
            "endmember matrix of length {} does not match {m} x {dim}",
            endmembers.len()
        )));
    }
    let max_norm = endmembers
        .chunks_exact(dim)
        .map(|u| u.iter().map(|v| v * v).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let weight = SUM_TO_ONE_WEIGHT * max_norm.max(1.0);
    let a = DMatrix::from_fn(dim + 1, m, |r, c| if r < dim { endmembers[c * dim + r] } else { weight });

    let rows: Vec<Result<(Vec<f64>, bool)>> = (0..cloud.len())
        .into_par_iter()
        .map(|i| {
            let x = cloud.row(i);
            let b = DVector::from_fn(dim + 1, |r, _| if r < dim { x[r] } else { weight });
            let sol = nnls::solve(&a, &b)?;
            let total: f64 = sol.coefficients.iter().sum();
            Ok(if total > 0.0 {
                (sol.coefficients.iter().map(|v| v / total).collect(), false)
            } else {
                (vec![1.0 / m as f64; m], true)
            })
        })
        .collect();

    let mut values = Vec::with_capacity(cloud.len() * m);
    let mut purity = Vec::with_capacity(cloud.len());
    let mut uniform_rows = Vec::new();
    for (i, row) in rows.into_iter().enumerate() {
        let (row, uniform) = row?;
        purity.push(row.iter().copied().fold(0.0, f64::max));
        values.extend(row);
        if uniform {
            uniform_rows.push(i);
        }
    }
    Ok(Abundances {
        m,
        values,
        purity,
        uniform_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endmember_pixel_is_pure() {
        let u = vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let c = PointCloud::from_rows(&[vec![1.0, 0.0], vec![0.2, 0.3]]).unwrap();
        let ab = abundances_and_purity(&c, &u, 3).unwrap();
        assert!((ab.purity[0] - 1.0).abs() < 1e-12);
        let s: f64 = ab.row(1).iter().sum();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn barycenter_has_minimal_purity() {
        let u = vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let third = 1.0 / 3.0;
        let c = PointCloud::from_rows(&[vec![third, third, third], vec![1.0, 0.0, 0.0]]).unwrap();
        let ab = abundances_and_purity(&c, &u, 3).unwrap();
        assert!((ab.purity[0] - third).abs() < 1e-9);
    }
}
