//! Label alignment, overall accuracy and Cohen's kappa.

use pathfinding::kuhn_munkres::kuhn_munkres;
use pathfinding::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub oa: f64,
    pub kappa: f64,
    /// Chance agreement from the aligned marginals.
    pub p_e: f64,
    /// Distinct predicted labels (rows of `confusion`), ascending.
    pub clusters: Vec<u32>,
    /// Distinct nonzero truth labels (columns of `confusion`), ascending.
    pub classes: Vec<u32>,
    /// `confusion[r][c]`: pixels with predicted `clusters[r]` and truth
    /// `classes[c]`.
    pub confusion: Vec<Vec<u64>>,
    /// `(cluster, class)` pairs; clusters left without a class are absent.
    pub alignment: Vec<(u32, u32)>,
    pub n_eval: usize,
}

fn distinct(labels: impl Iterator<Item = u32>) -> Vec<u32> {
    let mut v: Vec<u32> = labels.collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// Scores `pred` against `truth` under the one-to-one relabeling that
/// maximizes agreement. Pixels with truth 0 are ignored.
pub fn align_and_score(pred: &[u32], truth: &[u32]) -> Result<EvalReport> {
    if pred.len() != truth.len() {
        return Err(Error::input(format!(
            "{} predicted labels for {} truth labels",
            pred.len(),
            truth.len()
        )));
    }
    let pairs: Vec<(u32, u32)> = pred.iter().zip(truth).filter(|(_, &t)| t != 0).map(|(&p, &t)| (p, t)).collect();
    if pairs.is_empty() {
        return Err(Error::input("every pixel is unlabeled"));
    }
    let clusters = distinct(pairs.iter().map(|p| p.0));
    let classes = distinct(pairs.iter().map(|p| p.1));
    let mut confusion = vec![vec![0u64; classes.len()]; clusters.len()];
    for &(p, t) in &pairs {
        let r = clusters.binary_search(&p).expect("listed");
        let c = classes.binary_search(&t).expect("listed");
        confusion[r][c] += 1;
    }

    // Square, zero-padded assignment problem maximizing matched pixels.
    let size = clusters.len().max(classes.len());
    let weights = Matrix::from_fn(size, size, |(r, c)| {
        if r < clusters.len() && c < classes.len() {
            confusion[r][c] as i64
        } else {
            0
        }
    });
    let (matched, assignment) = kuhn_munkres(&weights);

    let n = pairs.len() as f64;
    let row_tot: Vec<u64> = confusion.iter().map(|r| r.iter().sum()).collect();
    let col_tot: Vec<u64> = (0..classes.len()).map(|c| confusion.iter().map(|r| r[c]).sum()).collect();
    let mut alignment = Vec::new();
    let mut p_e = 0.0;
    for (r, &c) in assignment.iter().enumerate().take(clusters.len()) {
        if c < classes.len() {
            alignment.push((clusters[r], classes[c]));
            p_e += row_tot[r] as f64 * col_tot[c] as f64;
        }
    }
    p_e /= n * n;
    let oa = matched as f64 / n;
    let kappa = if p_e < 1.0 { (oa - p_e) / (1.0 - p_e) } else { 1.0 };
    Ok(EvalReport {
        oa,
        kappa,
        p_e,
        clusters,
        classes,
        confusion,
        alignment,
        n_eval: pairs.len(),
    })
}
