//! Spectral clustering: K-Means on row-normalized leading eigenvectors of
//! the transition matrix.

use super::kmeans::{clustering_from_fit, kmeans_points};
use super::{Algorithm, Clustering, ParamRecord};
use crate::error::{Error, Result};
use crate::graph::MarkovGraph;
use crate::spectral::{spectral_decompose, DEFAULT_TOL};

pub fn spectral_clustering(graph: &MarkovGraph, k: usize, replicates: usize, seed: u64) -> Result<Clustering> {
    let n = graph.len();
    if k == 0 || k > n {
        return Err(Error::param(format!("K must satisfy 1 <= K <= n = {n}, got {k}")));
    }
    let dec = spectral_decompose(graph, k, DEFAULT_TOL)?;
    let mut rows = Vec::with_capacity(n * k);
    for i in 0..n {
        let r = dec.row(i);
        let norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        // Eigenvector rows are never all zero (the first is constant per
        // component), but guard anyway.
        let scale = if norm > 0.0 { 1.0 / norm } else { 0.0 };
        rows.extend(r.iter().map(|v| v * scale));
    }
    let fit = kmeans_points(&rows, k, k, replicates, seed)?;
    let mut out = clustering_from_fit(&fit, &rows, k, k);
    out.params = ParamRecord {
        algorithm: Some(Algorithm::Spectral),
        n_neighbors: Some(graph.n_neighbors()),
        k,
        ell: Some(k),
        replicates: Some(replicates),
        seed: Some(seed),
        ..Default::default()
    };
    Ok(out)
}
