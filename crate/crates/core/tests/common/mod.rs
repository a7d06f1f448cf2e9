//! Fixtures and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use dvic_core::rng::stream;
use dvic_core::PointCloud;
use nalgebra::DMatrix;
use rand::RngExt;
use rand_distr::{Distribution, StandardNormal};

/// Uniform points in the unit cube.
pub fn uniform_cloud(n: usize, dim: usize, seed: u64) -> PointCloud {
    let mut rng = stream(seed, 0x7e57);
    let data = (0..n * dim).map(|_| rng.random::<f64>()).collect();
    PointCloud::new(data, n, dim).unwrap()
}

/// Two isotropic Gaussian blobs centered at `-gap/2` and `+gap/2` on the
/// first axis; labels 1 and 2.
pub fn two_blobs(per_blob: usize, dim: usize, gap: f64, sd: f64, seed: u64) -> PointCloud {
    let mut rng = stream(seed, 0xb10b);
    let mut data = Vec::with_capacity(2 * per_blob * dim);
    let mut labels = Vec::with_capacity(2 * per_blob);
    for (b, center) in [-gap / 2.0, gap / 2.0].into_iter().enumerate() {
        for _ in 0..per_blob {
            for d in 0..dim {
                let z: f64 = StandardNormal.sample(&mut rng);
                data.push(if d == 0 { center } else { 0.0 } + sd * z);
            }
            labels.push(b as u32 + 1);
        }
    }
    PointCloud::new(data, 2 * per_blob, dim).unwrap().with_labels(labels).unwrap()
}

/// `P^t` by repeated multiplication (integer `t`).
pub fn dense_power(p: &DMatrix<f64>, t: u32) -> DMatrix<f64> {
    let mut out = DMatrix::identity(p.nrows(), p.ncols());
    for _ in 0..t {
        out = &out * p;
    }
    out
}

/// `sqrt(sum_k ((P^t)_ik - (P^t)_jk)^2 / pi_k)`.
pub fn dense_diffusion_distance(pt: &DMatrix<f64>, pi: &[f64], i: usize, j: usize) -> f64 {
    (0..pi.len())
        .map(|k| (pt[(i, k)] - pt[(j, k)]).powi(2) / pi[k])
        .sum::<f64>()
        .sqrt()
}

/// Same distance with the rows `(e_i - e_j) P^t`, `j > i`, propagated
/// directly, so nearly converged rows of `P^t` are never subtracted.
/// Returns one `[D_t(i, j) for j > i]` per entry of `times` (ascending).
pub fn dense_difference_distances(p: &DMatrix<f64>, pi: &[f64], times: &[u32], i: usize) -> Vec<Vec<f64>> {
    let n = pi.len();
    let mut v = DMatrix::<f64>::zeros(n - i - 1, n);
    for r in 0..n - i - 1 {
        v[(r, i)] = 1.0;
        v[(r, i + 1 + r)] = -1.0;
    }
    let mut out = Vec::with_capacity(times.len());
    let mut steps = 0;
    for &t in times {
        while steps < t {
            v = &v * p;
            steps += 1;
        }
        out.push(
            v.row_iter()
                .map(|row| row.iter().zip(pi).map(|(x, w)| x * x / w).sum::<f64>().sqrt())
                .collect(),
        );
    }
    out
}

/// Dense symmetric KNN adjacency (union rule, lower index wins ties).
pub fn brute_knn_adjacency(cloud: &PointCloud, k: usize) -> Vec<Vec<bool>> {
    let n = cloud.len();
    let mut adj = vec![vec![false; n]; n];
    for i in 0..n {
        let mut others: Vec<(f64, usize)> = (0..n)
            .filter(|&j| j != i)
            .map(|j| (dvic_core::cloud::sq_dist(cloud.row(i), cloud.row(j)), j))
            .collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for &(_, j) in &others[..k] {
            adj[i][j] = true;
            adj[j][i] = true;
        }
    }
    adj
}

/// Linear mixture `x = A E + noise` of `m` uniform-random endmembers in
/// `dim` bands with flat-Dirichlet abundances, at the given SNR in dB
/// (`None` for noiseless). Returns the cloud and the endmember matrix.
pub fn linear_mixture(m: usize, dim: usize, n: usize, snr_db: Option<f64>, seed: u64) -> (PointCloud, Vec<f64>) {
    let mut rng = stream(seed, 0x313);
    let endmembers: Vec<f64> = (0..m * dim).map(|_| rng.random::<f64>()).collect();
    let mut data = vec![0.0; n * dim];
    for row in data.chunks_exact_mut(dim) {
        let mut a: Vec<f64> = (0..m).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
        let s: f64 = a.iter().sum();
        a.iter_mut().for_each(|v| *v /= s);
        for (j, aj) in a.iter().enumerate() {
            for (x, e) in row.iter_mut().zip(&endmembers[j * dim..(j + 1) * dim]) {
                *x += aj * e;
            }
        }
    }
    if let Some(snr) = snr_db {
        let power = data.iter().map(|v| v * v).sum::<f64>() / data.len() as f64;
        let sd = (power / 10f64.powf(snr / 10.0)).sqrt();
        for v in &mut data {
            let z: f64 = StandardNormal.sample(&mut rng);
            *v += sd * z;
        }
    }
    (PointCloud::new(data, n, dim).unwrap(), endmembers)
}

/// `||U^T a - x||^2` with `U` row-major `m x dim`.
pub fn nnls_objective(u: &[f64], m: usize, x: &[f64], a: &[f64]) -> f64 {
    let dim = x.len();
    (0..dim)
        .map(|r| ((0..m).map(|j| a[j] * u[j * dim + r]).sum::<f64>() - x[r]).powi(2))
        .sum()
}

/// Gradient `2 U (U^T a - x)` of the NNLS objective.
pub fn nnls_gradient(u: &[f64], m: usize, x: &[f64], a: &[f64]) -> Vec<f64> {
    let dim = x.len();
    let resid: Vec<f64> = (0..dim)
        .map(|r| (0..m).map(|j| a[j] * u[j * dim + r]).sum::<f64>() - x[r])
        .collect();
    (0..m)
        .map(|j| 2.0 * (0..dim).map(|r| u[j * dim + r] * resid[r]).sum::<f64>())
        .collect()
}

/// Worst KKT violation of a candidate NNLS solution.
pub fn nnls_kkt_violation(u: &[f64], m: usize, x: &[f64], a: &[f64]) -> f64 {
    let g = nnls_gradient(u, m, x, a);
    a.iter()
        .zip(&g)
        .map(|(&aj, &gj)| {
            if aj < 0.0 {
                -aj
            } else if aj == 0.0 {
                (-gj).max(0.0)
            } else {
                gj.abs()
            }
        })
        .fold(0.0, f64::max)
}

/// Accelerated projected gradient with restarts, run until the projected
/// step moves less than `tol`.
pub fn projected_gradient_nnls(u: &[f64], m: usize, x: &[f64], tol: f64) -> Vec<f64> {
    let dim = x.len();
    let gram = DMatrix::from_fn(m, m, |i, j| (0..dim).map(|r| u[i * dim + r] * u[j * dim + r]).sum::<f64>());
    let lipschitz = 2.0 * gram.symmetric_eigenvalues().max().max(1e-300);
    let step = 1.0 / lipschitz;
    let mut a = vec![0.0; m];
    let mut y = a.clone();
    let mut momentum = 1.0f64;
    for _ in 0..2_000_000 {
        let g = nnls_gradient(u, m, x, &y);
        let next: Vec<f64> = y.iter().zip(&g).map(|(yi, gi)| (yi - step * gi).max(0.0)).collect();
        let moved = next.iter().zip(&a).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        if nnls_objective(u, m, x, &next) > nnls_objective(u, m, x, &a) {
            // Restart the momentum when the objective goes up.
            momentum = 1.0;
            y = a.clone();
            continue;
        }
        let m_next = (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt()) / 2.0;
        y = next
            .iter()
            .zip(&a)
            .map(|(p, q)| p + (momentum - 1.0) / m_next * (p - q))
            .collect();
        momentum = m_next;
        a = next;
        if moved < tol {
            break;
        }
    }
    a
}

/// `|det [1, r_e]_e|` for points `r_e` in `m - 1` dimensions, proportional to
/// the simplex volume.
pub fn lifted_abs_det(points: &[Vec<f64>]) -> f64 {
    let m = points.len();
    DMatrix::from_fn(m, m, |r, c| if r == 0 { 1.0 } else { points[c][r - 1] })
        .determinant()
        .abs()
}

/// Rows projected onto the top `k` principal axes (via SVD of the centered
/// data).
pub fn pca_scores(cloud: &PointCloud, k: usize) -> Vec<Vec<f64>> {
    let (n, dim) = (cloud.len(), cloud.dim());
    let mean: Vec<f64> = (0..dim).map(|d| cloud.rows().map(|r| r[d]).sum::<f64>() / n as f64).collect();
    let z = DMatrix::from_fn(n, dim, |i, d| cloud.row(i)[d] - mean[d]);
    let svd = z.clone().svd(false, true);
    let vt = svd.v_t.unwrap();
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    (0..n)
        .map(|i| {
            order[..k]
                .iter()
                .map(|&c| (0..dim).map(|d| z[(i, d)] * vt[(c, d)]).sum())
                .collect()
        })
        .collect()
}

/// Noiseless mixture whose first `m` rows are the simplex vertices
/// themselves, shuffled into random positions. Returns the cloud and the
/// vertex indices in ascending order.
pub fn simplex_with_vertices(m: usize, dim: usize, n: usize, seed: u64) -> (PointCloud, Vec<usize>) {
    let (mix, endmembers) = linear_mixture(m, dim, n, None, seed);
    let mut rows: Vec<Vec<f64>> = mix.rows().map(<[f64]>::to_vec).collect();
    let mut rng = stream(seed, 0x5e7);
    let mut slots = rand::seq::index::sample(&mut rng, n, m).into_vec();
    for (j, &s) in slots.iter().enumerate() {
        rows[s] = endmembers[j * dim..(j + 1) * dim].to_vec();
    }
    slots.sort_unstable();
    (PointCloud::from_rows(&rows).unwrap(), slots)
}

/// Expands a confusion table (rows: clusters 1.., columns: classes 0..)
/// into label vectors. Column 0 holds unlabeled pixels.
pub fn labels_from_table(table: &[Vec<u64>]) -> (Vec<u32>, Vec<u32>) {
    let mut pred = Vec::new();
    let mut truth = Vec::new();
    for (r, row) in table.iter().enumerate() {
        for (c, &count) in row.iter().enumerate() {
            for _ in 0..count {
                pred.push(r as u32 + 1);
                truth.push(c as u32);
            }
        }
    }
    (pred, truth)
}

pub fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exhaustive maximum of matched pixels over one-to-one relabelings.
pub fn brute_matched(table: &[Vec<u64>]) -> u64 {
    let rows = table.len();
    let cols = table[0].len() - 1;
    let size = rows.max(cols);
    permutations(size)
        .iter()
        .map(|perm| {
            (0..rows)
                .filter(|&r| perm[r] < cols)
                .map(|r| table[r][perm[r] + 1])
                .sum::<u64>()
        })
        .max()
        .unwrap()
}

/// Chance agreement recounted from raw labels along `alignment`, over the
/// pixels with nonzero truth.
pub fn chance_agreement(pred: &[u32], truth: &[u32], alignment: &[(u32, u32)]) -> f64 {
    let labeled: Vec<usize> = (0..truth.len()).filter(|&i| truth[i] != 0).collect();
    let n = labeled.len() as f64;
    let count = |f: &dyn Fn(usize) -> bool| labeled.iter().filter(|&&i| f(i)).count() as f64;
    alignment
        .iter()
        .map(|&(c, k)| count(&|i| pred[i] == c) * count(&|i| truth[i] == k))
        .sum::<f64>()
        / (n * n)
}
