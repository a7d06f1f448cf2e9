//! K-Means with k-means++ seeding and Lloyd iterations.

use rand::RngExt;
use rayon::prelude::*;

use super::{Algorithm, Clustering, ParamRecord};
use crate::cloud::{sq_dist, PointCloud};
use crate::error::{Error, Result};
use crate::rng;

/// Convergence threshold on total squared center shift, relative to the
/// summed per-coordinate variance of the data.
pub const KMEANS_TOL: f64 = 1e-8;
pub const KMEANS_MAX_ITER: usize = 300;

#[derive(Debug, Clone)]
pub struct KMeansFit {
    /// Labels in `1..=k`.
    pub labels: Vec<u32>,
    /// Row-major `k x dim`.
    pub centers: Vec<f64>,
    pub inertia: f64,
    pub iterations: usize,
    pub replicate: usize,
}

struct Points<'a> {
    data: &'a [f64],
    dim: usize,
}

impl Points<'_> {
    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    fn len(&self) -> usize {
        self.data.len() / self.dim
    }
}

fn nearest_center(x: &[f64], centers: &[f64], dim: usize) -> (usize, f64) {
    centers
        .chunks_exact(dim)
        .enumerate()
        .map(|(c, ctr)| (c, sq_dist(x, ctr)))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}

fn plus_plus(pts: &Points, k: usize, rng: &mut rng::Rng) -> Vec<f64> {
    let n = pts.len();
    let mut centers = Vec::with_capacity(k * pts.dim);
    centers.extend_from_slice(pts.row(rng.random_range(0..n)));
    let mut d2: Vec<f64> = (0..n).map(|i| sq_dist(pts.row(i), &centers[..pts.dim])).collect();
    for _ in 1..k {
        let total: f64 = d2.iter().sum();
        let pick = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = n - 1;
            for (i, &d) in d2.iter().enumerate() {
                acc += d;
                if acc > target && d > 0.0 {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            rng.random_range(0..n)
        };
        let start = centers.len();
        centers.extend_from_slice(pts.row(pick));
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(pts.row(i), &centers[start..]));
        }
    }
    centers
}

fn lloyd(pts: &Points, k: usize, mut centers: Vec<f64>, scale: f64) -> (Vec<usize>, Vec<f64>, f64, usize) {
    let (n, dim) = (pts.len(), pts.dim);
    let mut assign = vec![0usize; n];
    let mut iterations = 0;
    loop {
        let mut dists = vec![0.0; n];
        for i in 0..n {
            let (c, d) = nearest_center(pts.row(i), &centers, dim);
            assign[i] = c;
            dists[i] = d;
        }
        repair_empty(k, &mut assign, &mut dists);

        let mut sums = vec![0.0; k * dim];
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[assign[i]] += 1;
            for (s, v) in sums[assign[i] * dim..(assign[i] + 1) * dim].iter_mut().zip(pts.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            for s in &mut sums[c * dim..(c + 1) * dim] {
                *s /= counts[c] as f64;
            }
        }
        let shift = sq_dist(&sums, &centers);
        centers = sums;
        iterations += 1;
        if shift <= KMEANS_TOL * scale || iterations >= KMEANS_MAX_ITER {
            break;
        }
    }
    let inertia = (0..n).map(|i| sq_dist(pts.row(i), &centers[assign[i] * dim..(assign[i] + 1) * dim])).sum();
    (assign, centers, inertia, iterations)
}

/// Moves the point farthest from its center into each empty cluster.
fn repair_empty(k: usize, assign: &mut [usize], dists: &mut [f64]) {
    let mut counts = vec![0usize; k];
    for &a in assign.iter() {
        counts[a] += 1;
    }
    for c in 0..k {
        if counts[c] > 0 {
            continue;
        }
        let far = (0..assign.len())
            .filter(|&i| counts[assign[i]] > 1)
            .fold(None, |best: Option<usize>, i| match best {
                Some(b) if dists[b] >= dists[i] => Some(b),
                _ => Some(i),
            });
        if let Some(i) = far {
            counts[assign[i]] -= 1;
            assign[i] = c;
            dists[i] = 0.0;
            counts[c] = 1;
        }
    }
}

/// Best-of-`replicates` K-Means on row-major `n x dim` data.
pub fn kmeans_points(data: &[f64], dim: usize, k: usize, replicates: usize, seed: u64) -> Result<KMeansFit> {
    if dim == 0 || data.len() % dim != 0 {
        return Err(Error::param("data length is not a multiple of the dimension"));
    }
    let pts = Points { data, dim };
    let n = pts.len();
    if k == 0 || k > n {
        return Err(Error::param(format!("K must satisfy 1 <= K <= n = {n}, got {k}")));
    }
    if replicates == 0 {
        return Err(Error::param("at least one replicate is required"));
    }
    let mut mean = vec![0.0; dim];
    for i in 0..n {
        for (m, v) in mean.iter_mut().zip(pts.row(i)) {
            *m += v / n as f64;
        }
    }
    let scale = (0..n).map(|i| sq_dist(pts.row(i), &mean)).sum::<f64>() / n as f64;
    let scale = if scale > 0.0 { scale } else { 1.0 };

    let fits: Vec<KMeansFit> = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut g = rng::stream(seed, r as u64);
            let init = plus_plus(&pts, k, &mut g);
            let (assign, centers, inertia, iterations) = lloyd(&pts, k, init, scale);
            KMeansFit {
                labels: assign.iter().map(|&a| a as u32 + 1).collect(),
                centers,
                inertia,
                iterations,
                replicate: r,
            }
        })
        .collect();
    Ok(fits
        .into_iter()
        .reduce(|best, f| if f.inertia < best.inertia { f } else { best })
        .expect("replicates >= 1"))
}

pub fn kmeans(cloud: &PointCloud, k: usize, replicates: usize, seed: u64) -> Result<Clustering> {
    let fit = kmeans_points(cloud.data(), cloud.dim(), k, replicates, seed)?;
    let mut out = clustering_from_fit(&fit, cloud.data(), cloud.dim(), k);
    out.params = ParamRecord {
        algorithm: Some(Algorithm::Kmeans),
        k,
        replicates: Some(replicates),
        seed: Some(seed),
        ..Default::default()
    };
    Ok(out)
}

/// Clustering whose modes are the members nearest each center.
pub(crate) fn clustering_from_fit(fit: &KMeansFit, data: &[f64], dim: usize, k: usize) -> Clustering {
    let mut modes = vec![usize::MAX; k];
    let mut best = vec![f64::INFINITY; k];
    for (i, x) in data.chunks_exact(dim).enumerate() {
        let c = fit.labels[i] as usize - 1;
        let d = sq_dist(x, &fit.centers[c * dim..(c + 1) * dim]);
        if d < best[c] {
            best[c] = d;
            modes[c] = i;
        }
    }
    Clustering {
        labels: fit.labels.clone(),
        modes,
        k,
        score: None,
        density: None,
        purity: None,
        params: ParamRecord::default(),
    }
}
