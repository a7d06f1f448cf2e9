//! Mode detection and label propagation shared by LUND and D-VIC.
//!
//! Both algorithms rank points by a value function (density for LUND, the
//! density/purity harmonic mean for D-VIC), score each point by its value
//! times the diffusion distance to its nearest higher-valued point, take
//! the `K` best as modes, and then label the rest in decreasing value order
//! from their nearest labeled higher-valued point.
//!
//! Ties are broken by lowest index everywhere.

use rayon::prelude::*;

use super::kdtree::RankTree;
use crate::diffusion::DiffusionEmbedding;
use crate::error::{Error, Result};
use crate::spectral::SpectralDecomposition;

/// Harmonic mean of max-normalized density and purity.
pub fn zeta(density: &[f64], purity: &[f64]) -> Vec<f64> {
    assert_eq!(density.len(), purity.len());
    let pmax = density.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let emax = purity.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    density
        .iter()
        .zip(purity)
        .map(|(&p, &e)| {
            let (pb, eb) = (p / pmax, e / emax);
            if pb + eb > 0.0 {
                2.0 * pb * eb / (pb + eb)
            } else {
                0.0
            }
        })
        .collect()
}

/// Points sorted by value descending, index ascending, with each point's
/// rank and the last rank sharing its value.
#[derive(Debug, Clone)]
pub struct ValueOrder {
    pub order: Vec<usize>,
    pub rank: Vec<usize>,
    /// `tie_end[r]`: the last rank whose value equals the value at rank `r`.
    pub tie_end: Vec<usize>,
}

impl ValueOrder {
    pub fn new(values: &[f64]) -> Self {
        let n = values.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
        let mut rank = vec![0; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        let mut tie_end = vec![0; n];
        let mut r = n;
        while r > 0 {
            r -= 1;
            tie_end[r] = if r + 1 < n && values[order[r + 1]] == values[order[r]] {
                tie_end[r + 1]
            } else {
                r
            };
        }
        Self { order, rank, tie_end }
    }
}

/// Distance-to-better for every point, with the point attaining it.
#[derive(Debug, Clone)]
pub struct BetterNeighbors {
    pub order: ValueOrder,
    pub dist: Vec<f64>,
    /// Nearest other point of value at least as high (`None` for the
    /// top-ranked point).
    pub nearest: Vec<Option<usize>>,
}

impl BetterNeighbors {
    pub fn new(values: &[f64], emb: &DiffusionEmbedding) -> Self {
        let n = values.len();
        assert_eq!(n, emb.len());
        let order = ValueOrder::new(values);
        let tree = RankTree::new(emb, &order.rank);
        let top = order.order[0];
        let (dist, nearest) = (0..n)
            .into_par_iter()
            .map(|i| {
                if i == top {
                    let far = (0..n).map(|j| emb.sq_distance(i, j)).fold(0.0, f64::max);
                    (far.sqrt(), None)
                } else {
                    let limit = order.tie_end[order.rank[i]];
                    match tree.nearest(i, limit, i) {
                        Some((d, j)) => (d.sqrt(), Some(j)),
                        None => (0.0, None),
                    }
                }
            })
            .unzip();
        Self { order, dist, nearest }
    }
}

/// Distance from each point to its nearest other point of value at least as
/// high; the top-ranked point gets its distance to the farthest point.
pub fn dist_to_better_embedded(values: &[f64], emb: &DiffusionEmbedding) -> Vec<f64> {
    BetterNeighbors::new(values, emb).dist
}

/// [`dist_to_better_embedded`] at diffusion time `t`.
pub fn dist_to_better(values: &[f64], dec: &SpectralDecomposition, t: f64) -> Vec<f64> {
    dist_to_better_embedded(values, &DiffusionEmbedding::new(dec, t))
}

/// Indices of the `k` largest entries, largest first, ties by lower index.
pub fn select_modes(product: &[f64], k: usize) -> Result<Vec<usize>> {
    if k == 0 {
        return Err(Error::param("number of clusters must be positive"));
    }
    if k > product.len() {
        return Err(Error::param(format!("{k} clusters requested for {} points", product.len())));
    }
    let mut idx: Vec<usize> = (0..product.len()).collect();
    idx.sort_by(|&a, &b| product[b].total_cmp(&product[a]).then(a.cmp(&b)));
    idx.truncate(k);
    Ok(idx)
}

/// Result of label propagation.
#[derive(Debug, Clone)]
pub struct Propagation {
    /// Labels in `1..=K`.
    pub labels: Vec<u32>,
    /// Point each non-modal point copied its label from (`usize::MAX` for
    /// modes).
    pub parent: Vec<usize>,
    /// Points with no labeled higher-valued candidate, labeled from their
    /// nearest mode instead.
    pub orphans: Vec<usize>,
}

/// Modes get labels `1..=K` in the given order; every other point, visited
/// by decreasing value, takes the label of its diffusion-nearest labeled
/// point with value at least its own.
///
/// All points ranked above `x` are labeled when `x` is visited, so the
/// candidate set is "every higher-ranked point, plus modes tied with `x`
/// ranked below it". Parents are therefore found independently (and in
/// parallel) before the sequential label pass.
pub fn propagate_labels_embedded(values: &[f64], modes: &[usize], emb: &DiffusionEmbedding) -> Propagation {
    propagate_with(&BetterNeighbors::new(values, emb), modes, emb)
}

/// Propagation reusing a distance-to-better search: for a point without
/// value ties, its nearest better point is exactly its parent.
pub fn propagate_with(better: &BetterNeighbors, modes: &[usize], emb: &DiffusionEmbedding) -> Propagation {
    let ord = &better.order;
    let n = ord.order.len();
    assert_eq!(n, emb.len());
    let mut mode_label = vec![0u32; n];
    for (k, &m) in modes.iter().enumerate() {
        mode_label[m] = k as u32 + 1;
    }
    let mut tree: Option<RankTree> = None;
    if (0..n).any(|i| mode_label[i] == 0 && ord.tie_end[ord.rank[i]] != ord.rank[i]) {
        tree = Some(RankTree::new(emb, &ord.rank));
    }

    let parent: Vec<Option<usize>> = (0..n)
        .into_par_iter()
        .map(|i| {
            if mode_label[i] != 0 {
                return None;
            }
            let r = ord.rank[i];
            if ord.tie_end[r] == r {
                return better.nearest[i];
            }
            let tree = tree.as_ref().expect("built when ties exist");
            let mut best = if r > 0 { tree.nearest(i, r - 1, i) } else { None };
            for &m in modes {
                let rm = ord.rank[m];
                if rm > r && rm <= ord.tie_end[r] {
                    let d = emb.sq_distance(i, m);
                    let closer = match best {
                        None => true,
                        Some((bd, bi)) => d < bd || (d == bd && m < bi),
                    };
                    if closer {
                        best = Some((d, m));
                    }
                }
            }
            best.map(|(_, j)| j)
        })
        .collect();

    let mut labels = mode_label;
    let mut parents = vec![usize::MAX; n];
    let mut orphans = Vec::new();
    for &i in &ord.order {
        if labels[i] != 0 {
            continue;
        }
        let p = match parent[i] {
            Some(p) => p,
            None => {
                orphans.push(i);
                nearest_mode(emb, modes, i)
            }
        };
        debug_assert!(labels[p] != 0, "parent of {i} is unlabeled");
        labels[i] = labels[p];
        parents[i] = p;
    }
    Propagation {
        labels,
        parent: parents,
        orphans,
    }
}

fn nearest_mode(emb: &DiffusionEmbedding, modes: &[usize], i: usize) -> usize {
    let mut best = (f64::INFINITY, usize::MAX);
    for &m in modes {
        let d = emb.sq_distance(i, m);
        if d < best.0 || (d == best.0 && m < best.1) {
            best = (d, m);
        }
    }
    best.1
}

/// [`propagate_labels_embedded`] at diffusion time `t`.
pub fn propagate_labels(values: &[f64], modes: &[usize], dec: &SpectralDecomposition, t: f64) -> Propagation {
    propagate_labels_embedded(values, modes, &DiffusionEmbedding::new(dec, t))
}
