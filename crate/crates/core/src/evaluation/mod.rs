//! Accuracy metrics, hyperparameter grids and grid search.

mod grids;
mod metrics;
mod search;

pub use grids::{
    n_grid, sigma_grid, sigma_grid_from_neighbors, sigma_pool_neighbors, t_exponent, t_grid, SIGMA_POOL_NEIGHBORS,
    T_GRID_TARGET,
};
pub use metrics::{align_and_score, EvalReport};
pub use search::{grid_search, median, trial_seed, GridReport, GridSpec, NodeResult, TGridEntry};
