//! Diffusion distances and the diffusion map.
//!
//! With `pi`-orthonormal right eigenvectors,
//! `D_t(x_i, x_j)^2 = sum_k lambda_k^(2t) (psi_k(i) - psi_k(j))^2`, which is
//! the Euclidean distance between rows of the embedding
//! `x_i -> (|lambda_k|^t psi_k(i))_k`. Magnitudes are used so that real `t`
//! is well defined for negative eigenvalues; distances are unaffected.

use crate::cloud::sq_dist;
use crate::spectral::SpectralDecomposition;

/// Diffusion distance at time `t` using all retained eigenpairs.
pub fn diffusion_distance(dec: &SpectralDecomposition, t: f64, i: usize, j: usize) -> f64 {
    assert!(t >= 0.0, "diffusion time must be nonnegative");
    let (a, b) = (dec.row(i), dec.row(j));
    dec.eigenvalues()
        .iter()
        .zip(a.iter().zip(b))
        .map(|(l, (x, y))| l.abs().powf(2.0 * t) * (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Row-major `n x ell` diffusion map at a fixed time.
#[derive(Debug, Clone)]
pub struct DiffusionEmbedding {
    coords: Vec<f64>,
    ell: usize,
    t: f64,
}

impl DiffusionEmbedding {
    pub fn new(dec: &SpectralDecomposition, t: f64) -> Self {
        assert!(t >= 0.0, "diffusion time must be nonnegative");
        let scale: Vec<f64> = dec.eigenvalues().iter().map(|l| l.abs().powf(t)).collect();
        let ell = dec.ell();
        let coords = (0..dec.len())
            .flat_map(|i| dec.row(i).iter().zip(&scale).map(|(x, s)| x * s).collect::<Vec<_>>())
            .collect();
        Self { coords, ell, t }
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.ell
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ell..(i + 1) * self.ell]
    }

    #[inline]
    pub fn sq_distance(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.row(i), self.row(j))
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.sq_distance(i, j).sqrt()
    }
}

/// Diffusion map matrix (`n x ell`, row-major) at time `t`.
pub fn diffusion_embedding(dec: &SpectralDecomposition, t: f64) -> DiffusionEmbedding {
    DiffusionEmbedding::new(dec, t)
}
