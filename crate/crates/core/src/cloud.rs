//! Point clouds of pixel spectra.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` pixel spectra with `dim` bands each, stored row-major.
///
/// `labels` uses 0 for "unlabeled"; `shape` is the `(rows, cols)` layout of
/// the image the pixels came from, if any.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    data: Vec<f64>,
    n: usize,
    dim: usize,
    shape: Option<(usize, usize)>,
    labels: Option<Vec<u32>>,
}

impl PointCloud {
    pub fn new(data: Vec<f64>, n: usize, dim: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::input(format!("need at least 2 points, got {n}")));
        }
        if dim < 1 {
            return Err(Error::input("need at least 1 band"));
        }
        if data.len() != n * dim {
            return Err(Error::input(format!(
                "data length {} does not match {n} x {dim}",
                data.len()
            )));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::input(format!(
                "non-finite value at row {}, column {}",
                pos / dim,
                pos % dim
            )));
        }
        Ok(Self {
            data,
            n,
            dim,
            shape: None,
            labels: None,
        })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::input("ragged rows"));
        }
        Self::new(rows.concat(), rows.len(), dim)
    }

    pub fn with_shape(mut self, rows: usize, cols: usize) -> Result<Self> {
        if rows * cols != self.n {
            return Err(Error::input(format!(
                "shape {rows}x{cols} does not hold {} pixels",
                self.n
            )));
        }
        self.shape = Some((rows, cols));
        Ok(self)
    }

    pub fn with_labels(mut self, labels: Vec<u32>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::input(format!(
                "{} labels for {} points",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn shape(&self) -> Option<(usize, usize)> {
        self.shape
    }

    pub fn labels(&self) -> Option<&[u32]> {
        self.labels.as_deref()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    /// Column-major copy as an `n x dim` matrix.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.dim, &self.data)
    }
}

/// Squared Euclidean distance, summed in index order.
#[inline]
pub fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
