//! Linear spectral unmixing: endmember count, endmember extraction,
//! abundances and pixel purity.

mod abundance;
pub mod avmax;
mod hysime;
mod nnls;
mod noise;

pub use abundance::{abundances_and_purity, Abundances, SUM_TO_ONE_WEIGHT};
pub use avmax::{avmax, AvmaxReplicate, AvmaxResult};
pub use hysime::{hysime, hysime_detail, SubspaceEstimate};
pub use nnls::{nnls, NnlsSolution};
pub use noise::{estimate_noise, NoiseEstimate, NoiseMethod};

use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::Result;

/// Replicates used by D-VIC's endmember search unless configured otherwise.
pub const DEFAULT_REPLICATES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "mode", content = "value")]
pub enum EndmemberCount {
    /// Estimate from the data.
    Hysime,
    Fixed(usize),
}

#[derive(Debug, Clone)]
pub struct UnmixingResult {
    pub m: usize,
    /// Row-major `m x dim`.
    pub endmembers: Vec<f64>,
    pub endmember_indices: Vec<usize>,
    pub abundances: Abundances,
    pub replicate_volumes: Vec<f64>,
    pub volume: f64,
    pub seed: u64,
    pub noise_method: Option<NoiseMethod>,
}

impl UnmixingResult {
    pub fn purity(&self) -> &[f64] {
        &self.abundances.purity
    }
}

/// Endmember count for `cloud`, resolved according to `count`.
pub fn resolve_endmember_count(cloud: &PointCloud, count: EndmemberCount) -> Result<(usize, Option<NoiseMethod>)> {
    match count {
        EndmemberCount::Fixed(m) => Ok((m, None)),
        EndmemberCount::Hysime => {
            let noise = estimate_noise(cloud)?;
            Ok((hysime(cloud, &noise), Some(noise.method)))
        }
    }
}

/// Noise estimate, subspace estimate, endmember extraction and abundances.
///
/// AVMAX needs at least two endmembers, so an estimate of one is raised to
/// two.
pub fn unmix(cloud: &PointCloud, count: EndmemberCount, replicates: usize, seed: u64) -> Result<UnmixingResult> {
    let (m, noise_method) = resolve_endmember_count(cloud, count)?;
    unmix_with_m(cloud, m.max(2), replicates, seed, noise_method)
}

pub(crate) fn unmix_with_m(
    cloud: &PointCloud,
    m: usize,
    replicates: usize,
    seed: u64,
    noise_method: Option<NoiseMethod>,
) -> Result<UnmixingResult> {
    let ext = avmax(cloud, m, replicates, seed)?;
    // Canonical (ascending pixel index) order, so equal endmember sets give
    // bit-identical abundances whatever order a replicate found them in.
    let mut indices = ext.indices.clone();
    indices.sort_unstable();
    let endmembers: Vec<f64> = indices.iter().flat_map(|&i| cloud.row(i).iter().copied()).collect();
    let abundances = abundances_and_purity(cloud, &endmembers, m)?;
    Ok(UnmixingResult {
        m,
        replicate_volumes: ext.replicate_volumes(),
        volume: ext.volume,
        endmembers,
        endmember_indices: indices,
        abundances,
        seed,
        noise_method,
    })
}
