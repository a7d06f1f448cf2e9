//! Diffusion- and unmixing-based clustering for hyperspectral and other
//! point-cloud data.
//!
//! The pipeline builds a symmetric KNN graph, takes the leading eigenpairs
//! of its random-walk transition matrix to get diffusion distances, scores
//! points by a value function (kernel density, optionally combined with
//! spectral-unmixing purity) and picks cluster modes far in diffusion
//! distance from any better-valued point.

pub mod cloud;
pub mod clustering;
pub mod datasets;
pub mod diffusion;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod kde;
pub mod rng;
pub mod spectral;
pub mod unmixing;

pub use cloud::PointCloud;
pub use clustering::{dvic, kmeans, lund, spectral_clustering, Algorithm, Clustering, DiffusionParams, DvicParams};
pub use diffusion::{diffusion_distance, DiffusionEmbedding};
pub use error::{Error, Result};
pub use graph::{MarkovGraph, NeighborTable};
pub use kde::{kde, DensityField};
pub use spectral::{spectral_decompose, EigenSolver, SpectralDecomposition};
pub use unmixing::{unmix, EndmemberCount, UnmixingResult};
