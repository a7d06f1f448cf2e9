//! Truncated eigendecomposition of the Markov transition matrix.
//!
//! `P = D^-1 W` is similar to the symmetric `S = D^-1/2 W D^-1/2`, so its
//! spectrum is real. Eigenvectors of `S` are mapped back to right
//! eigenvectors of `P` via `psi = sqrt(vol) D^-1/2 v`, which makes them
//! orthonormal in the `pi`-weighted inner product:
//! `sum_i pi_i psi_k(i) psi_l(i) = delta_kl`.

pub mod lanczos;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MarkovGraph;
use lanczos::LanczosOptions;

/// Components at or below this size are solved densely under
/// [`EigenSolver::Auto`].
pub const DENSE_CUTOFF: usize = 500;

pub const DEFAULT_TOL: f64 = 1e-10;

/// Eigenvectors used for diffusion distances unless configured otherwise.
pub const DEFAULT_ELL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EigenSolver {
    #[default]
    Auto,
    Dense,
    Lanczos,
}

/// Leading `ell` eigenpairs of `P` by magnitude.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    /// Row-major `n x ell`.
    eigenvectors: Vec<f64>,
    pi: Vec<f64>,
    ell: usize,
}

impl SpectralDecomposition {
    pub fn len(&self) -> usize {
        self.pi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pi.is_empty()
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn pi(&self) -> &[f64] {
        &self.pi
    }

    /// Coordinates of point `i` in every retained eigenvector.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.eigenvectors[i * self.ell..(i + 1) * self.ell]
    }

    /// Eigenvector `k` as a dense vector.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|i| self.eigenvectors[i * self.ell + k]).collect()
    }

    /// Keeps only the first `ell` pairs.
    pub fn truncate(&self, ell: usize) -> Result<Self> {
        if ell == 0 || ell > self.ell {
            return Err(Error::param(format!("cannot truncate {} pairs to {ell}", self.ell)));
        }
        let eigenvectors = (0..self.len())
            .flat_map(|i| self.row(i)[..ell].iter().copied())
            .collect();
        Ok(Self {
            eigenvalues: self.eigenvalues[..ell].to_vec(),
            eigenvectors,
            pi: self.pi.clone(),
            ell,
        })
    }

    /// Second eigenvalue, or `None` when fewer than two pairs were kept.
    pub fn lambda2(&self) -> Option<f64> {
        self.eigenvalues.get(1).copied()
    }
}

/// Decomposition with the default solver choice.
pub fn spectral_decompose(graph: &MarkovGraph, ell: usize, tol: f64) -> Result<SpectralDecomposition> {
    spectral_decompose_with(graph, ell, tol, EigenSolver::Auto)
}

pub fn spectral_decompose_with(
    graph: &MarkovGraph,
    ell: usize,
    tol: f64,
    solver: EigenSolver,
) -> Result<SpectralDecomposition> {
    let n = graph.len();
    if ell == 0 || ell > n {
        return Err(Error::param(format!("ell must satisfy 1 <= ell <= n = {n}, got {ell}")));
    }
    let volume: f64 = graph.degree().iter().sum();

    // (eigenvalue, global psi) pairs across all components.
    let mut pairs: Vec<(f64, Vec<f64>)> = Vec::new();
    if graph.is_connected() {
        let members: Vec<usize> = (0..n).collect();
        collect_component(graph, &members, ell, tol, solver, volume, &mut pairs)?;
    } else {
        let mut groups: Vec<Vec<usize>> = vec![Vec::new(); graph.n_components()];
        for (i, &c) in graph.components().iter().enumerate() {
            groups[c].push(i);
        }
        for members in &groups {
            let sub = graph.subgraph(members);
            let mut local = Vec::new();
            collect_component(&sub, &(0..members.len()).collect::<Vec<_>>(), ell, tol, solver, volume, &mut local)?;
            for (lambda, psi_local) in local {
                let mut psi = vec![0.0; n];
                for (k, &g) in members.iter().enumerate() {
                    psi[g] = psi_local[k];
                }
                pairs.push((lambda, psi));
            }
        }
    }

    // Stable: equal eigenvalues keep component order.
    pairs.sort_by(|a, b| b.0.abs().total_cmp(&a.0.abs()).then(b.0.total_cmp(&a.0)));
    pairs.truncate(ell);

    let mut eigenvectors = vec![0.0; n * ell];
    let mut eigenvalues = Vec::with_capacity(ell);
    for (k, (lambda, psi)) in pairs.into_iter().enumerate() {
        eigenvalues.push(lambda);
        for i in 0..n {
            eigenvectors[i * ell + k] = psi[i];
        }
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
        pi: graph.pi().to_vec(),
        ell,
    })
}

/// Solves one connected graph and pushes `psi` vectors scaled with the
/// global volume. `graph` is the component itself.
fn collect_component(
    graph: &MarkovGraph,
    members: &[usize],
    ell: usize,
    tol: f64,
    solver: EigenSolver,
    volume: f64,
    out: &mut Vec<(f64, Vec<f64>)>,
) -> Result<()> {
    let n = members.len();
    let nev = ell.min(n);
    let dense = match solver {
        EigenSolver::Dense => true,
        EigenSolver::Lanczos => false,
        EigenSolver::Auto => n <= DENSE_CUTOFF,
    };

    let (values, vectors): (Vec<f64>, Vec<Vec<f64>>) = if dense {
        let eig = SymmetricEigen::new(graph.dense_symmetric());
        let vals = eig.eigenvalues.as_slice();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| vals[b].abs().total_cmp(&vals[a].abs()).then(vals[b].total_cmp(&vals[a])));
        order
            .into_iter()
            .take(nev)
            .map(|k| (vals[k], eig.eigenvectors.column(k).iter().copied().collect()))
            .unzip()
    } else {
        let opts = LanczosOptions {
            tol,
            max_restarts: 10 * ell + 100,
            basis_size: None,
            seed: 0x5eed,
        };
        let out = lanczos::largest_magnitude(n, nev, |x, y| graph.apply_symmetric(x, y), opts)?;
        let vecs = (0..nev).map(|k| out.vectors.column(k).iter().copied().collect()).collect();
        (out.values, vecs)
    };

    let degree = graph.degree();
    for (lambda, v) in values.into_iter().zip(vectors) {
        let mut psi: Vec<f64> = v
            .iter()
            .zip(degree)
            .map(|(vi, d)| vi * (volume / d).sqrt())
            .collect();
        let peak = psi.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if let Some(first) = psi.iter().find(|x| x.abs() > 1e-10 * peak) {
            if *first < 0.0 {
                psi.iter_mut().for_each(|x| *x = -*x);
            }
        }
        out.push((lambda, psi));
    }
    Ok(())
}
