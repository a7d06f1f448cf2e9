//! Hyperparameter grid search scored by median overall accuracy.
//!
//! Every `(N, sigma0, t)` node runs `trials` seeded trials. Trial `r` uses
//! the stream `mix(seed, r)` for everything stochastic, so node results do
//! not depend on scheduling. With caching on, the neighbor table is built
//! once, graphs and decompositions once per `N`, densities once per
//! `(N, sigma0)`, diffusion coordinates once per `(N, t)` and unmixing once
//! per trial; distinct purity vectors are clustered once each.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grids::t_grid;
use super::metrics::align_and_score;
use crate::cloud::PointCloud;
use crate::clustering::{
    dvic, kmeans, lund, mode_cluster, spectral_clustering, zeta, Algorithm, DiffusionParams, DvicParams,
};
use crate::diffusion::DiffusionEmbedding;
use crate::error::{Error, Result};
use crate::graph::{MarkovGraph, NeighborTable};
use crate::kde::kde_from_neighbors;
use crate::rng;
use crate::spectral::{spectral_decompose, SpectralDecomposition, DEFAULT_ELL, DEFAULT_TOL};
use crate::unmixing::{unmix, EndmemberCount, DEFAULT_REPLICATES};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub sigma_grid: Vec<f64>,
    /// Fixed diffusion times; when absent each `N` uses `{0, 1, 2, ..., 2^T}`
    /// from its own decomposition.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    #[serde(default = "one")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub k: usize,
    #[serde(default = "default_ell")]
    pub ell: usize,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_endmembers")]
    pub endmembers: EndmemberCount,
    /// Share intermediate results across nodes. Results are identical
    /// either way; turning it off only costs time.
    #[serde(default = "yes")]
    pub cache: bool,
}

fn one() -> usize {
    1
}
fn yes() -> bool {
    true
}
fn default_ell() -> usize {
    DEFAULT_ELL
}
fn default_replicates() -> usize {
    DEFAULT_REPLICATES
}
fn default_endmembers() -> EndmemberCount {
    EndmemberCount::Hysime
}

impl GridSpec {
    pub fn new(n_grid: Vec<usize>, sigma_grid: Vec<f64>, k: usize) -> Self {
        Self {
            n_grid,
            sigma_grid,
            t_grid: None,
            trials: 1,
            seed: 0,
            k,
            ell: DEFAULT_ELL,
            replicates: DEFAULT_REPLICATES,
            endmembers: EndmemberCount::Hysime,
            cache: true,
        }
    }

    fn validate(&self, algorithm: Algorithm) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::param("trials must be at least 1"));
        }
        let needs_n = matches!(algorithm, Algorithm::Lund | Algorithm::Dvic | Algorithm::Spectral);
        if needs_n && self.n_grid.is_empty() {
            return Err(Error::param("neighbor grid is empty"));
        }
        let needs_sigma = matches!(algorithm, Algorithm::Lund | Algorithm::Dvic);
        if needs_sigma && self.sigma_grid.is_empty() {
            return Err(Error::param("sigma grid is empty"));
        }
        if matches!(&self.t_grid, Some(t) if t.is_empty()) {
            return Err(Error::param("diffusion time grid is empty"));
        }
        Ok(())
    }
}

pub fn trial_seed(seed: u64, trial: usize) -> u64 {
    rng::mix(seed, trial as u64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeResult {
    pub n_neighbors: Option<usize>,
    pub sigma0: Option<f64>,
    pub t: Option<f64>,
    pub median_oa: Option<f64>,
    pub median_kappa: Option<f64>,
    /// Per-trial OA, trial order.
    pub oa: Vec<f64>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TGridEntry {
    pub n_neighbors: usize,
    pub t: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridReport {
    pub algorithm: Algorithm,
    pub spec: GridSpec,
    pub t_grids: Vec<TGridEntry>,
    /// Endmember count used by each trial (D-VIC only).
    pub endmember_counts: Option<Vec<usize>>,
    pub nodes: Vec<NodeResult>,
    /// Index into `nodes` of the highest median OA (first on ties).
    pub best: Option<usize>,
}

impl GridReport {
    pub fn best_node(&self) -> Option<&NodeResult> {
        self.best.map(|i| &self.nodes[i])
    }

    pub fn best_oa(&self) -> Option<f64> {
        self.best_node().and_then(|n| n.median_oa)
    }
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_unstable_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { 0.5 * (v[h - 1] + v[h]) })
}

fn node(n: Option<usize>, sigma: Option<f64>, t: Option<f64>, scores: Result<Vec<(f64, f64)>>) -> NodeResult {
    match scores {
        Ok(s) => {
            let oa: Vec<f64> = s.iter().map(|x| x.0).collect();
            let kappa: Vec<f64> = s.iter().map(|x| x.1).collect();
            NodeResult {
                n_neighbors: n,
                sigma0: sigma,
                t,
                median_oa: median(&oa),
                median_kappa: median(&kappa),
                oa,
                error: None,
            }
        }
        Err(e) => NodeResult {
            n_neighbors: n,
            sigma0: sigma,
            t,
            median_oa: None,
            median_kappa: None,
            oa: Vec::new(),
            error: Some(e.to_string()),
        },
    }
}

fn score(labels: &[u32], truth: &[u32]) -> Result<(f64, f64)> {
    let r = align_and_score(labels, truth)?;
    Ok((r.oa, r.kappa))
}

fn best_index(nodes: &[NodeResult]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, n) in nodes.iter().enumerate() {
        if let Some(oa) = n.median_oa {
            if best.is_none_or(|(_, b)| oa > b) {
                best = Some((i, oa));
            }
        }
    }
    best.map(|b| b.0)
}

/// Runs the sweep. Node failures are recorded in the report; only invalid
/// specs or missing ground truth abort.
pub fn grid_search(algorithm: Algorithm, cloud: &PointCloud, spec: &GridSpec) -> Result<GridReport> {
    spec.validate(algorithm)?;
    let truth = cloud
        .labels()
        .ok_or_else(|| Error::input("grid search needs ground-truth labels"))?;
    if truth.iter().all(|&l| l == 0) {
        return Err(Error::input("every pixel is unlabeled"));
    }
    let mut report = match algorithm {
        Algorithm::Lund | Algorithm::Dvic if spec.cache => diffusion_cached(algorithm, cloud, truth, spec),
        Algorithm::Lund | Algorithm::Dvic => diffusion_uncached(algorithm, cloud, truth, spec),
        Algorithm::Spectral => spectral_sweep(cloud, truth, spec),
        Algorithm::Kmeans => kmeans_sweep(cloud, truth, spec),
    };
    report.best = best_index(&report.nodes);
    Ok(report)
}

fn empty_report(algorithm: Algorithm, spec: &GridSpec) -> GridReport {
    GridReport {
        algorithm,
        spec: spec.clone(),
        t_grids: Vec::new(),
        endmember_counts: None,
        nodes: Vec::new(),
        best: None,
    }
}

struct Geometry {
    dec: SpectralDecomposition,
    times: Vec<f64>,
}

fn geometry(table: &NeighborTable, n_neighbors: usize, spec: &GridSpec) -> Result<Geometry> {
    let graph = MarkovGraph::from_neighbors(table, n_neighbors);
    let dec = spectral_decompose(&graph, spec.ell.min(table.len()), DEFAULT_TOL)?;
    let times = match &spec.t_grid {
        Some(t) => t.clone(),
        None => t_grid(&dec)?,
    };
    Ok(Geometry { dec, times })
}

fn check_neighbors(n_neighbors: usize, n: usize) -> Result<()> {
    if n_neighbors == 0 || n_neighbors >= n {
        return Err(Error::param(format!("N = {n_neighbors} outside 1..{n}")));
    }
    Ok(())
}

/// Failed cells for every `(sigma0, t)` of a neighbor count whose graph
/// could not be built; without a fixed time grid, one cell per `sigma0`.
fn push_failed_n(report: &mut GridReport, nn: usize, spec: &GridSpec, e: &Error) {
    for &s in &spec.sigma_grid {
        match &spec.t_grid {
            Some(times) => {
                for &t in times {
                    report.nodes.push(node(Some(nn), Some(s), Some(t), Err(Error::input(e.to_string()))));
                }
            }
            None => report.nodes.push(node(Some(nn), Some(s), None, Err(Error::input(e.to_string())))),
        }
    }
}

fn diffusion_cached(algorithm: Algorithm, cloud: &PointCloud, truth: &[u32], spec: &GridSpec) -> GridReport {
    let n = cloud.len();
    let mut report = empty_report(algorithm, spec);
    let kmax = spec.n_grid.iter().copied().filter(|&k| k > 0 && k < n).max();
    let table = kmax.map(|k| NeighborTable::build(cloud, k));

    // Trial -> index into the distinct purity vectors.
    let mut purities: Vec<Vec<f64>> = Vec::new();
    let mut trial_purity: Vec<usize> = Vec::new();
    let mut unmix_error: Option<String> = None;
    if algorithm == Algorithm::Dvic {
        let mut counts = Vec::new();
        for trial in 0..spec.trials {
            match unmix(cloud, spec.endmembers, spec.replicates, trial_seed(spec.seed, trial)) {
                Ok(u) => {
                    counts.push(u.m);
                    let eta = u.purity();
                    let idx = purities.iter().position(|p| p.as_slice() == eta).unwrap_or_else(|| {
                        purities.push(eta.to_vec());
                        purities.len() - 1
                    });
                    trial_purity.push(idx);
                }
                Err(e) => {
                    unmix_error = Some(format!("unmixing failed: {e}"));
                    break;
                }
            }
        }
        report.endmember_counts = Some(counts);
    }

    for &nn in &spec.n_grid {
        let geo = check_neighbors(nn, n).and_then(|_| match &table {
            Some(Ok(t)) => geometry(t, nn, spec),
            Some(Err(e)) => Err(Error::input(e.to_string())),
            None => unreachable!("a valid N implies a table"),
        });
        let geo = match geo {
            Ok(g) => g,
            Err(e) => {
                push_failed_n(&mut report, nn, spec, &e);
                continue;
            }
        };
        report.t_grids.push(TGridEntry {
            n_neighbors: nn,
            t: geo.times.clone(),
        });
        let table = table.as_ref().and_then(|t| t.as_ref().ok()).expect("table built");
        let densities: Vec<Result<Vec<f64>>> = spec
            .sigma_grid
            .iter()
            .map(|&s| kde_from_neighbors(table, nn, s).map(|d| d.values().to_vec()))
            .collect();

        // results[t][sigma] = per-trial scores.
        let results: Vec<Vec<Result<Vec<(f64, f64)>>>> = geo
            .times
            .par_iter()
            .map(|&t| {
                if !(t >= 0.0 && t.is_finite()) {
                    let e = format!("invalid diffusion time {t}");
                    return densities.iter().map(|_| Err(Error::param(e.clone()))).collect();
                }
                let emb = DiffusionEmbedding::new(&geo.dec, t);
                densities
                    .iter()
                    .map(|density| {
                        let density = density.as_ref().map_err(|e| Error::param(e.to_string()))?;
                        match algorithm {
                            Algorithm::Lund => {
                                let (_, _, prop) = mode_cluster(density, &emb, spec.k)?;
                                let s = score(&prop.labels, truth)?;
                                Ok(vec![s; spec.trials])
                            }
                            _ => {
                                if let Some(e) = &unmix_error {
                                    return Err(Error::input(e.clone()));
                                }
                                let per_unique = purities
                                    .iter()
                                    .map(|eta| {
                                        let (_, _, prop) = mode_cluster(&zeta(density, eta), &emb, spec.k)?;
                                        score(&prop.labels, truth)
                                    })
                                    .collect::<Result<Vec<_>>>()?;
                                Ok(trial_purity.iter().map(|&u| per_unique[u]).collect())
                            }
                        }
                    })
                    .collect()
            })
            .collect();

        let mut by_time: Vec<_> = results.into_iter().map(Vec::into_iter).collect();
        let mut cells: Vec<Vec<Result<Vec<(f64, f64)>>>> = (0..spec.sigma_grid.len()).map(|_| Vec::new()).collect();
        for per_sigma in &mut by_time {
            for cell in cells.iter_mut() {
                cell.push(per_sigma.next().expect("one entry per sigma"));
            }
        }
        for (si, per_t) in cells.into_iter().enumerate() {
            for (ti, r) in per_t.into_iter().enumerate() {
                report
                    .nodes
                    .push(node(Some(nn), Some(spec.sigma_grid[si]), Some(geo.times[ti]), r));
            }
        }
    }
    report
}

fn diffusion_uncached(algorithm: Algorithm, cloud: &PointCloud, truth: &[u32], spec: &GridSpec) -> GridReport {
    let n = cloud.len();
    let mut report = empty_report(algorithm, spec);
    if algorithm == Algorithm::Dvic {
        report.endmember_counts = (0..spec.trials)
            .map(|trial| unmix(cloud, spec.endmembers, spec.replicates, trial_seed(spec.seed, trial)).map(|u| u.m))
            .collect::<Result<Vec<_>>>()
            .ok();
    }
    for &nn in &spec.n_grid {
        let times = check_neighbors(nn, n)
            .and_then(|_| NeighborTable::build(cloud, nn))
            .and_then(|table| geometry(&table, nn, spec))
            .map(|g| g.times);
        let times = match times {
            Ok(t) => {
                report.t_grids.push(TGridEntry {
                    n_neighbors: nn,
                    t: t.clone(),
                });
                t
            }
            Err(e) => {
                push_failed_n(&mut report, nn, spec, &e);
                continue;
            }
        };
        for &s in &spec.sigma_grid {
            for &t in &times {
                let mut params = DiffusionParams::new(nn, s, t, spec.k);
                params.ell = spec.ell;
                let scores = (0..spec.trials)
                    .map(|trial| {
                        let c = match algorithm {
                            Algorithm::Lund => lund(cloud, &params)?,
                            _ => {
                                let mut p = DvicParams::new(params, trial_seed(spec.seed, trial));
                                p.replicates = spec.replicates;
                                p.endmembers = spec.endmembers;
                                dvic(cloud, &p)?
                            }
                        };
                        score(&c.labels, truth)
                    })
                    .collect::<Result<Vec<_>>>();
                report.nodes.push(node(Some(nn), Some(s), Some(t), scores));
            }
        }
    }
    report
}

fn spectral_sweep(cloud: &PointCloud, truth: &[u32], spec: &GridSpec) -> GridReport {
    let mut report = empty_report(Algorithm::Spectral, spec);
    for &nn in &spec.n_grid {
        let scores = MarkovGraph::build(cloud, nn).and_then(|graph| {
            (0..spec.trials)
                .map(|trial| {
                    let c = spectral_clustering(&graph, spec.k, spec.replicates, trial_seed(spec.seed, trial))?;
                    score(&c.labels, truth)
                })
                .collect::<Result<Vec<_>>>()
        });
        report.nodes.push(node(Some(nn), None, None, scores));
    }
    report
}

fn kmeans_sweep(cloud: &PointCloud, truth: &[u32], spec: &GridSpec) -> GridReport {
    let mut report = empty_report(Algorithm::Kmeans, spec);
    let scores = (0..spec.trials)
        .map(|trial| {
            let c = kmeans(cloud, spec.k, spec.replicates, trial_seed(spec.seed, trial))?;
            score(&c.labels, truth)
        })
        .collect::<Result<Vec<_>>>();
    report.nodes.push(node(None, None, None, scores));
    report
}
