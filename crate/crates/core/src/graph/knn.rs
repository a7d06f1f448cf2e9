//! Exact k-nearest-neighbor search.

use rayon::prelude::*;

use crate::cloud::{sq_dist, PointCloud};
use crate::error::{Error, Result};

/// The `k` nearest neighbors of every point (the point itself excluded),
/// ordered by `(distance, index)`.
#[derive(Debug, Clone)]
pub struct NeighborTable {
    k: usize,
    indices: Vec<usize>,
    sq_dists: Vec<f64>,
}

impl NeighborTable {
    /// Brute-force search; rows are processed in parallel, each row
    /// independently, so the table does not depend on the thread count.
    pub fn build(cloud: &PointCloud, k: usize) -> Result<Self> {
        let n = cloud.len();
        if k == 0 || k >= n {
            return Err(Error::param(format!(
                "neighbor count must satisfy 1 <= k < n = {n}, got {k}"
            )));
        }
        let rows: Vec<(Vec<usize>, Vec<f64>)> = (0..n)
            .into_par_iter()
            .map_init(
                || Vec::with_capacity(n),
                |buf: &mut Vec<(f64, usize)>, i| {
                    buf.clear();
                    let xi = cloud.row(i);
                    buf.extend(
                        (0..n)
                            .filter(|&j| j != i)
                            .map(|j| (sq_dist(xi, cloud.row(j)), j)),
                    );
                    let cmp = |a: &(f64, usize), b: &(f64, usize)| {
                        a.0.total_cmp(&b.0).then(a.1.cmp(&b.1))
                    };
                    if k < buf.len() {
                        buf.select_nth_unstable_by(k - 1, cmp);
                        buf.truncate(k);
                    }
                    buf.sort_unstable_by(cmp);
                    buf.iter().map(|&(d, j)| (j, d)).unzip()
                },
            )
            .collect();
        let mut indices = Vec::with_capacity(n * k);
        let mut sq_dists = Vec::with_capacity(n * k);
        for (idx, d) in rows {
            indices.extend(idx);
            sq_dists.extend(d);
        }
        Ok(Self {
            k,
            indices,
            sq_dists,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.indices.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// First `k` neighbor indices of point `i`.
    pub fn neighbors(&self, i: usize, k: usize) -> &[usize] {
        debug_assert!(k <= self.k);
        &self.indices[i * self.k..i * self.k + k]
    }

    /// Squared distances matching [`neighbors`](Self::neighbors).
    pub fn sq_distances(&self, i: usize, k: usize) -> &[f64] {
        debug_assert!(k <= self.k);
        &self.sq_dists[i * self.k..i * self.k + k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn collinear_nearest() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![1.0], vec![3.0]]).unwrap();
        let t = NeighborTable::build(&c, 1).unwrap();
        assert_eq!(t.neighbors(0, 1), &[1]);
        assert_eq!(t.neighbors(1, 1), &[0]);
        assert_eq!(t.neighbors(2, 1), &[1]);
        assert_eq!(t.sq_distances(2, 1), &[4.0]);
    }

    #[test]
    fn ties_go_to_lower_index() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![-1.0], vec![1.0]]).unwrap();
        let t = NeighborTable::build(&c, 1).unwrap();
        assert_eq!(t.neighbors(0, 1), &[1]);
    }

    #[test]
    fn rejects_k_out_of_range() {
        let c = PointCloud::from_rows(&[vec![0.0], vec![1.0]]).unwrap();
        assert!(NeighborTable::build(&c, 2).is_err());
        assert!(NeighborTable::build(&c, 0).is_err());
    }
}
