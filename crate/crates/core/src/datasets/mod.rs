//! Dataset loading, preprocessing and synthetic generators.

mod csv_io;
pub mod envi;
mod synth;

pub use csv_io::{load_csv, read_labels, write_csv, write_labels};
pub use envi::load_envi;
pub use synth::{
    barycentric, synth_moons, synth_triangle, triangle_vertices, MoonsParams, SyntheticTriangleTruth,
    TRIANGLE_CENTER, TRIANGLE_CENTER_SD, TRIANGLE_EDGE, TRIANGLE_PER_VERTEX, TRIANGLE_VERTEX_SD,
};

use std::path::{Path, PathBuf};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::rng;

const JITTER_STREAM: u64 = 0x6a69_7474;

/// Where the pixels come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "kebab-case")]
pub enum Source {
    Envi {
        path: PathBuf,
        #[serde(default)]
        labels: Option<PathBuf>,
    },
    Csv {
        path: PathBuf,
    },
    SyntheticMoons {
        #[serde(default, flatten)]
        params: MoonsParams,
    },
    SyntheticTriangle,
}

/// Dataset configuration, usually read from a TOML file:
///
/// ```toml
/// source = "envi"             # envi | csv | synthetic-moons | synthetic-triangle
/// path = "scene.hdr"          # relative to the config file
/// labels = "scene_gt.hdr"     # envi only, optional
/// band_drop = [0, 1, 107]
/// standardize = true
/// jitter_sigma = 1e-7
/// seed = 0
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub source: Source,
    #[serde(default)]
    pub band_drop: Vec<usize>,
    #[serde(default = "default_true")]
    pub standardize: bool,
    #[serde(default)]
    pub jitter_sigma: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_true() -> bool {
    true
}

impl DatasetSpec {
    pub fn new(source: Source) -> Self {
        Self {
            source,
            band_drop: Vec::new(),
            standardize: true,
            jitter_sigma: None,
            seed: 0,
        }
    }

    /// Parses a TOML spec; relative paths are resolved against the file's
    /// directory.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut spec: Self = toml::from_str(&text).map_err(|e| Error::format(path, e.to_string()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        let resolve = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match &mut spec.source {
            Source::Envi { path, labels } => {
                resolve(path);
                if let Some(l) = labels {
                    resolve(l);
                }
            }
            Source::Csv { path } => resolve(path),
            _ => {}
        }
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(s) = self.jitter_sigma {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::param(format!("jitter_sigma must be nonnegative, got {s}")));
            }
        }
        Ok(())
    }
}

/// A loaded, preprocessed dataset.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub cloud: PointCloud,
    pub triangle_truth: Option<SyntheticTriangleTruth>,
    pub preprocessing: Preprocessing,
}

/// What preprocessing did.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub dropped_bands: Vec<usize>,
    pub jitter_sigma: Option<f64>,
    /// Standardization convention applied, if any.
    pub standardization: Option<String>,
    /// Retained-band indices (after dropping) that were constant.
    pub constant_bands: Vec<usize>,
}

pub fn load_dataset(spec: &DatasetSpec) -> Result<Dataset> {
    spec.validate()?;
    let (raw, triangle_truth) = match &spec.source {
        Source::Envi { path, labels } => (load_envi(path, labels.as_deref())?, None),
        Source::Csv { path } => (load_csv(path)?, None),
        Source::SyntheticMoons { params } => (synth_moons(params, spec.seed)?, None),
        Source::SyntheticTriangle => {
            let (c, t) = synth_triangle(spec.seed)?;
            (c, Some(t))
        }
    };
    let (cloud, preprocessing) = preprocess(&raw, spec)?;
    Ok(Dataset {
        cloud,
        triangle_truth,
        preprocessing,
    })
}

/// Band drop, then seeded jitter, then per-band z-scoring (population
/// standard deviation). Constant bands are centered to zero and reported.
pub fn preprocess(cloud: &PointCloud, spec: &DatasetSpec) -> Result<(PointCloud, Preprocessing)> {
    spec.validate()?;
    let dim = cloud.dim();
    let mut drop = spec.band_drop.clone();
    drop.sort_unstable();
    drop.dedup();
    if let Some(&bad) = drop.iter().find(|&&b| b >= dim) {
        return Err(Error::param(format!("band {bad} out of range for {dim} bands")));
    }
    let keep: Vec<usize> = (0..dim).filter(|b| drop.binary_search(b).is_err()).collect();
    if keep.is_empty() {
        return Err(Error::param("every band was dropped"));
    }
    let kd = keep.len();
    let n = cloud.len();
    let mut data: Vec<f64> = cloud.rows().flat_map(|r| keep.iter().map(move |&b| r[b])).collect();

    if let Some(sigma) = spec.jitter_sigma.filter(|&s| s > 0.0) {
        let mut g = rng::stream(spec.seed, JITTER_STREAM);
        for v in &mut data {
            let z: f64 = StandardNormal.sample(&mut g);
            *v += sigma * z;
        }
    }

    let mut constant_bands = Vec::new();
    if spec.standardize {
        for b in 0..kd {
            let mean = (0..n).map(|i| data[i * kd + b]).sum::<f64>() / n as f64;
            let var = (0..n).map(|i| (data[i * kd + b] - mean).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            let constant = !(sd > f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE));
            if constant {
                constant_bands.push(b);
                log::warn!("band {} is constant; centered but not scaled", keep[b]);
            }
            for i in 0..n {
                let v = &mut data[i * kd + b];
                *v = if constant { 0.0 } else { (*v - mean) / sd };
            }
        }
    }

    let mut out = PointCloud::new(data, n, kd)?;
    if let Some((r, c)) = cloud.shape() {
        out = out.with_shape(r, c)?;
    }
    if let Some(l) = cloud.labels() {
        out = out.with_labels(l.to_vec())?;
    }
    Ok((
        out,
        Preprocessing {
            dropped_bands: drop,
            jitter_sigma: spec.jitter_sigma,
            standardization: spec.standardize.then(|| "per-band z-score".to_string()),
            constant_bands,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_from_toml() {
        let spec: DatasetSpec = toml::from_str("source = \"synthetic-moons\"\nn = 200\nseed = 4\n").unwrap();
        assert_eq!(spec.seed, 4);
        assert!(spec.standardize);
        match spec.source {
            Source::SyntheticMoons { params } => {
                assert_eq!(params.n, 200);
                assert_eq!(params.noise, 0.1);
            }
            other => panic!("{other:?}"),
        }
        let spec: DatasetSpec =
            toml::from_str("source = \"envi\"\npath = \"a.hdr\"\nband_drop = [1]\nstandardize = false\n").unwrap();
        assert_eq!(spec.band_drop, vec![1]);
        assert!(matches!(spec.source, Source::Envi { labels: None, .. }));
    }

    #[test]
    fn drop_then_standardize() {
        let c = PointCloud::from_rows(&[vec![1.0, 5.0, 2.0], vec![3.0, 5.0, 9.0], vec![5.0, 5.0, 7.0]]).unwrap();
        let mut spec = DatasetSpec::new(Source::SyntheticTriangle);
        spec.band_drop = vec![2];
        let (out, info) = preprocess(&c, &spec).unwrap();
        assert_eq!(out.dim(), 2);
        assert_eq!(info.constant_bands, vec![1]);
        let sd = (8.0f64 / 3.0).sqrt();
        assert_eq!(out.row(0), &[-2.0 / sd, 0.0]);
        spec.band_drop = vec![0, 1, 2];
        assert!(preprocess(&c, &spec).is_err());
        spec.band_drop = vec![3];
        assert!(preprocess(&c, &spec).is_err());
    }
}
