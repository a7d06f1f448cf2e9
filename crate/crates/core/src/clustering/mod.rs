//! Clustering algorithms: LUND, D-VIC, and the K-Means and spectral
//! clustering baselines.

mod kdtree;
mod kmeans;
mod modes;
mod spectral;

pub use kmeans::{kmeans, kmeans_points, KMeansFit, KMEANS_MAX_ITER, KMEANS_TOL};
pub use modes::{
    dist_to_better, dist_to_better_embedded, propagate_labels, propagate_labels_embedded, propagate_with,
    select_modes, zeta, BetterNeighbors, Propagation, ValueOrder,
};
pub use spectral::spectral_clustering;

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::diffusion::DiffusionEmbedding;
use crate::error::{Error, Result};
use crate::graph::{MarkovGraph, NeighborTable};
use crate::kde::kde_from_neighbors;
use crate::spectral::{spectral_decompose, SpectralDecomposition, DEFAULT_ELL, DEFAULT_TOL};
use crate::unmixing::{unmix, EndmemberCount, UnmixingResult, DEFAULT_REPLICATES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Lund,
    Dvic,
    Kmeans,
    Spectral,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "lund" => Ok(Algorithm::Lund),
            "dvic" | "d-vic" => Ok(Algorithm::Dvic),
            "kmeans" | "k-means" => Ok(Algorithm::Kmeans),
            "spectral" | "sc" => Ok(Algorithm::Spectral),
            other => Err(Error::param(format!("unknown algorithm '{other}'"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::Lund => "lund",
            Algorithm::Dvic => "dvic",
            Algorithm::Kmeans => "kmeans",
            Algorithm::Spectral => "spectral",
        })
    }
}

/// Value function, distance-to-better and their product `D_t`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ModeScore {
    pub value_fn: Vec<f64>,
    pub dist_fn: Vec<f64>,
    pub product: Vec<f64>,
}

impl ModeScore {
    pub fn compute(values: &[f64], emb: &DiffusionEmbedding) -> Self {
        Self::from_dist(values, dist_to_better_embedded(values, emb))
    }

    fn from_dist(values: &[f64], dist_fn: Vec<f64>) -> Self {
        let product = values.iter().zip(&dist_fn).map(|(v, d)| v * d).collect();
        Self {
            value_fn: values.to_vec(),
            dist_fn,
            product,
        }
    }
}

/// Every parameter a clustering run depended on.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ParamRecord {
    pub algorithm: Option<Algorithm>,
    pub n_neighbors: Option<usize>,
    pub n_kde: Option<usize>,
    pub sigma0: Option<f64>,
    pub t: Option<f64>,
    pub k: usize,
    pub ell: Option<usize>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    /// Endmember count used by D-VIC.
    pub m: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct Clustering {
    /// Labels in `1..=k`.
    pub labels: Vec<u32>,
    /// `labels[modes[j]] == j + 1`.
    pub modes: Vec<usize>,
    pub k: usize,
    pub score: Option<ModeScore>,
    pub density: Option<Vec<f64>>,
    pub purity: Option<Vec<f64>>,
    pub params: ParamRecord,
}

/// Parameters shared by LUND and D-VIC.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionParams {
    pub n_neighbors: usize,
    /// KDE neighbor count; defaults to `n_neighbors`.
    pub n_kde: Option<usize>,
    pub sigma0: f64,
    pub t: f64,
    pub k: usize,
    pub ell: usize,
}

impl DiffusionParams {
    pub fn new(n_neighbors: usize, sigma0: f64, t: f64, k: usize) -> Self {
        Self {
            n_neighbors,
            n_kde: None,
            sigma0,
            t,
            k,
            ell: DEFAULT_ELL,
        }
    }

    pub fn kde_neighbors(&self) -> usize {
        self.n_kde.unwrap_or(self.n_neighbors)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.t >= 0.0 && self.t.is_finite()) {
            return Err(Error::param(format!("diffusion time must be nonnegative, got {}", self.t)));
        }
        if self.k == 0 || self.k > n {
            return Err(Error::param(format!("K must satisfy 1 <= K <= n = {n}, got {}", self.k)));
        }
        if self.ell == 0 {
            return Err(Error::param("ell must be positive"));
        }
        Ok(())
    }

    fn record(&self, algorithm: Algorithm) -> ParamRecord {
        ParamRecord {
            algorithm: Some(algorithm),
            n_neighbors: Some(self.n_neighbors),
            n_kde: Some(self.kde_neighbors()),
            sigma0: Some(self.sigma0),
            t: Some(self.t),
            k: self.k,
            ell: Some(self.ell),
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DvicParams {
    pub diffusion: DiffusionParams,
    pub replicates: usize,
    pub seed: u64,
    pub endmembers: EndmemberCount,
}

impl DvicParams {
    pub fn new(diffusion: DiffusionParams, seed: u64) -> Self {
        Self {
            diffusion,
            replicates: DEFAULT_REPLICATES,
            seed,
            endmembers: EndmemberCount::Hysime,
        }
    }
}

/// Graph, decomposition and neighbor table for one neighbor count.
pub struct DiffusionGeometry {
    pub table: NeighborTable,
    pub graph: MarkovGraph,
    pub decomposition: SpectralDecomposition,
}

impl DiffusionGeometry {
    pub fn build(cloud: &PointCloud, params: &DiffusionParams) -> Result<Self> {
        let kmax = params.n_neighbors.max(params.kde_neighbors());
        let table = NeighborTable::build(cloud, kmax)?;
        let graph = MarkovGraph::from_neighbors(&table, params.n_neighbors);
        let ell = params.ell.min(cloud.len());
        let decomposition = spectral_decompose(&graph, ell, DEFAULT_TOL)?;
        Ok(Self {
            table,
            graph,
            decomposition,
        })
    }
}

/// Mode selection and propagation for an arbitrary value function.
pub fn mode_cluster(values: &[f64], emb: &DiffusionEmbedding, k: usize) -> Result<(ModeScore, Vec<usize>, Propagation)> {
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::input("value function has non-finite entries"));
    }
    let better = BetterNeighbors::new(values, emb);
    let score = ModeScore::from_dist(values, better.dist.clone());
    let modes = select_modes(&score.product, k)?;
    let prop = propagate_with(&better, &modes, emb);
    Ok((score, modes, prop))
}

/// LUND from a precomputed density and decomposition.
pub fn lund_from_parts(density: &[f64], dec: &SpectralDecomposition, t: f64, k: usize) -> Result<Clustering> {
    let emb = DiffusionEmbedding::new(dec, t);
    let (score, modes, prop) = mode_cluster(density, &emb, k)?;
    Ok(Clustering {
        labels: prop.labels,
        modes,
        k,
        score: Some(score),
        density: Some(density.to_vec()),
        purity: None,
        params: ParamRecord {
            algorithm: Some(Algorithm::Lund),
            t: Some(t),
            k,
            ell: Some(dec.ell()),
            ..Default::default()
        },
    })
}

/// D-VIC from a precomputed density, purity and decomposition.
pub fn dvic_from_parts(
    density: &[f64],
    purity: &[f64],
    dec: &SpectralDecomposition,
    t: f64,
    k: usize,
) -> Result<Clustering> {
    let values = zeta(density, purity);
    let emb = DiffusionEmbedding::new(dec, t);
    let (score, modes, prop) = mode_cluster(&values, &emb, k)?;
    Ok(Clustering {
        labels: prop.labels,
        modes,
        k,
        score: Some(score),
        density: Some(density.to_vec()),
        purity: Some(purity.to_vec()),
        params: ParamRecord {
            algorithm: Some(Algorithm::Dvic),
            t: Some(t),
            k,
            ell: Some(dec.ell()),
            ..Default::default()
        },
    })
}

pub fn lund(cloud: &PointCloud, params: &DiffusionParams) -> Result<Clustering> {
    params.validate(cloud.len())?;
    let geo = DiffusionGeometry::build(cloud, params)?;
    let density = kde_from_neighbors(&geo.table, params.kde_neighbors(), params.sigma0)?;
    let mut out = lund_from_parts(density.values(), &geo.decomposition, params.t, params.k)?;
    out.params = params.record(Algorithm::Lund);
    out.params.ell = Some(geo.decomposition.ell());
    Ok(out)
}

/// D-VIC clustering together with the unmixing it used.
pub fn dvic_detailed(cloud: &PointCloud, params: &DvicParams) -> Result<(Clustering, UnmixingResult)> {
    let d = &params.diffusion;
    d.validate(cloud.len())?;
    let unmixing = unmix(cloud, params.endmembers, params.replicates, params.seed)?;
    let geo = DiffusionGeometry::build(cloud, d)?;
    let density = kde_from_neighbors(&geo.table, d.kde_neighbors(), d.sigma0)?;
    let mut out = dvic_from_parts(density.values(), unmixing.purity(), &geo.decomposition, d.t, d.k)?;
    out.params = d.record(Algorithm::Dvic);
    out.params.ell = Some(geo.decomposition.ell());
    out.params.replicates = Some(params.replicates);
    out.params.seed = Some(params.seed);
    out.params.m = Some(unmixing.m);
    Ok((out, unmixing))
}

pub fn dvic(cloud: &PointCloud, params: &DvicParams) -> Result<Clustering> {
    dvic_detailed(cloud, params).map(|(c, _)| c)
}
