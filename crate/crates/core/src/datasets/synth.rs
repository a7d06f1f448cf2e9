//! Seeded synthetic datasets with ground truth.

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng;

const MOONS_STREAM: u64 = 0x6d6f_6f6e;
const TRIANGLE_STREAM: u64 = 0x7472_6961;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MoonsParams {
    pub n: usize,
    pub noise: f64,
    pub radius: f64,
    /// Vertical position of the lower arc's center.
    pub offset: f64,
}

impl Default for MoonsParams {
    fn default() -> Self {
        Self {
            n: 1000,
            noise: 0.1,
            radius: 1.0,
            offset: 0.5,
        }
    }
}

/// Two interleaved half circles: the upper arc centered at the origin
/// (label 1), the lower arc centered at `(radius, offset)` (label 2). Arc
/// angles are evenly spaced over `[0, pi]`; Gaussian noise is added after.
pub fn synth_moons(params: &MoonsParams, seed: u64) -> Result<PointCloud> {
    let MoonsParams { n, noise, radius, offset } = *params;
    if n < 4 {
        return Err(Error::param(format!("two moons needs at least 4 points, got {n}")));
    }
    if !(noise >= 0.0 && radius > 0.0 && noise.is_finite() && radius.is_finite() && offset.is_finite()) {
        return Err(Error::param("moons noise must be nonnegative and radius positive"));
    }
    let n_upper = n / 2;
    let n_lower = n - n_upper;
    let angles = |count: usize| (0..count).map(move |i| std::f64::consts::PI * i as f64 / (count - 1) as f64);

    let mut data = Vec::with_capacity(2 * n);
    for a in angles(n_upper) {
        data.extend([radius * a.cos(), radius * a.sin()]);
    }
    for a in angles(n_lower) {
        data.extend([radius - radius * a.cos(), offset - radius * a.sin()]);
    }
    if noise > 0.0 {
        let mut g = rng::stream(seed, MOONS_STREAM);
        for v in &mut data {
            let z: f64 = StandardNormal.sample(&mut g);
            *v += noise * z;
        }
    }
    let labels = std::iter::repeat_n(1, n_upper).chain(std::iter::repeat_n(2, n_lower)).collect();
    PointCloud::new(data, n, 2)?.with_labels(labels)
}

pub const TRIANGLE_EDGE: f64 = std::f64::consts::SQRT_2;
pub const TRIANGLE_VERTEX_SD: f64 = 0.175;
pub const TRIANGLE_CENTER_SD: f64 = 0.0175;
pub const TRIANGLE_PER_VERTEX: usize = 1000;
pub const TRIANGLE_CENTER: usize = 2000;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticTriangleTruth {
    /// Row-major `3 x 2` vertex coordinates.
    pub endmembers: Vec<f64>,
    /// Row-major `n x 3` barycentric coordinates.
    pub abundances: Vec<f64>,
    /// Argmax abundance, in `1..=3`.
    pub labels: Vec<u32>,
    /// Generating blob per point: vertex `0..3`, or 3 for the center blob.
    pub blob: Vec<u8>,
}

impl SyntheticTriangleTruth {
    pub fn abundance(&self, i: usize) -> &[f64] {
        &self.abundances[3 * i..3 * i + 3]
    }

    pub fn purity(&self) -> Vec<f64> {
        self.abundances
            .chunks_exact(3)
            .map(|r| r.iter().copied().fold(0.0, f64::max))
            .collect()
    }
}

/// Vertices of the origin-centered equilateral triangle with edge `sqrt 2`,
/// the first pointing up.
pub fn triangle_vertices() -> [[f64; 2]; 3] {
    let r = TRIANGLE_EDGE / 3f64.sqrt();
    [90.0f64, 210.0, 330.0].map(|deg| {
        let a = deg.to_radians();
        [r * a.cos(), r * a.sin()]
    })
}

/// Barycentric coordinates of `p`; the last is `1 - first - second`.
pub fn barycentric(v: &[[f64; 2]; 3], p: [f64; 2]) -> [f64; 3] {
    let det = (v[1][1] - v[2][1]) * (v[0][0] - v[2][0]) + (v[2][0] - v[1][0]) * (v[0][1] - v[2][1]);
    let l0 = ((v[1][1] - v[2][1]) * (p[0] - v[2][0]) + (v[2][0] - v[1][0]) * (p[1] - v[2][1])) / det;
    let l1 = ((v[2][1] - v[0][1]) * (p[0] - v[2][0]) + (v[0][0] - v[2][0]) * (p[1] - v[2][1])) / det;
    [l0, l1, 1.0 - l0 - l1]
}

/// 1000 in-hull Gaussian samples around each vertex and 2000 in-hull
/// samples from a tight Gaussian at the origin; `n = 5000`.
pub fn synth_triangle(seed: u64) -> Result<(PointCloud, SyntheticTriangleTruth)> {
    let v = triangle_vertices();
    let mut g = rng::stream(seed, TRIANGLE_STREAM);
    let n = 3 * TRIANGLE_PER_VERTEX + TRIANGLE_CENTER;
    let mut data = Vec::with_capacity(2 * n);
    let mut abundances = Vec::with_capacity(3 * n);
    let mut blob = Vec::with_capacity(n);
    let blobs = [
        (v[0], TRIANGLE_VERTEX_SD, TRIANGLE_PER_VERTEX),
        (v[1], TRIANGLE_VERTEX_SD, TRIANGLE_PER_VERTEX),
        (v[2], TRIANGLE_VERTEX_SD, TRIANGLE_PER_VERTEX),
        ([0.0, 0.0], TRIANGLE_CENTER_SD, TRIANGLE_CENTER),
    ];
    for (b, (center, sd, count)) in blobs.into_iter().enumerate() {
        let mut accepted = 0;
        while accepted < count {
            let dx: f64 = StandardNormal.sample(&mut g);
            let dy: f64 = StandardNormal.sample(&mut g);
            let p = [center[0] + sd * dx, center[1] + sd * dy];
            let bary = barycentric(&v, p);
            if bary.iter().all(|&l| l >= 0.0) {
                data.extend(p);
                abundances.extend(bary);
                blob.push(b as u8);
                accepted += 1;
            }
        }
    }
    let labels: Vec<u32> = abundances
        .chunks_exact(3)
        .map(|r| {
            let mut best = 0;
            for k in 1..3 {
                if r[k] > r[best] {
                    best = k;
                }
            }
            best as u32 + 1
        })
        .collect();
    let cloud = PointCloud::new(data, n, 2)?.with_labels(labels.clone())?;
    let truth = SyntheticTriangleTruth {
        endmembers: v.iter().flatten().copied().collect(),
        abundances,
        labels,
        blob,
    };
    Ok((cloud, truth))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vertices_have_unit_barycentrics() {
        let v = triangle_vertices();
        for (k, p) in v.iter().enumerate() {
            let b = barycentric(&v, *p);
            for (j, l) in b.iter().enumerate() {
                assert!((l - f64::from(u8::from(j == k))).abs() < 1e-12);
            }
        }
        let d = ((v[0][0] - v[1][0]).powi(2) + (v[0][1] - v[1][1]).powi(2)).sqrt();
        assert!((d - TRIANGLE_EDGE).abs() < 1e-14);
        let c = barycentric(&v, [0.0, 0.0]);
        assert!(c.iter().all(|l| (l - 1.0 / 3.0).abs() < 1e-12));
    }

    #[test]
    fn moons_split_and_noiseless_arcs() {
        let c = synth_moons(&MoonsParams { noise: 0.0, ..Default::default() }, 1).unwrap();
        let labels = c.labels().unwrap();
        assert_eq!(labels.iter().filter(|&&l| l == 1).count(), 500);
        for (i, p) in c.rows().enumerate() {
            let r = if labels[i] == 1 {
                p[0].hypot(p[1])
            } else {
                (p[0] - 1.0).hypot(p[1] - 0.5)
            };
            assert!((r - 1.0).abs() < 1e-12);
        }
    }
}
