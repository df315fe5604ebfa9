//! Simulation harness: data generation, analytic test coverage and study grids.

pub mod config;
pub mod external;
pub mod grid;
pub mod model;
pub mod report;
pub mod study;

pub use config::{CellConfig, PredictionSource, SimScenario, StudyConfig};
pub use external::{export_design, ExternalPredictions};
pub use grid::halton_grid;
pub use model::{gen_data, true_quantile, Covariates, NoiseModel, Observation};
pub use report::{write_outputs, CoverageReport, CoverageSummary, RepetitionRecord};
pub use study::run_study;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid study config: {0}")]
    Config(String),
    #[error("prediction file: {0}")]
    Predictions(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Mean over `grid` of `F_{Y|x}(endpoint(x))`; `1` when every endpoint is `+inf`.
pub fn analytic_coverage<F>(endpoint: F, noise: NoiseModel, grid: &[Covariates]) -> f64
where
    F: Fn(&Covariates) -> f64,
{
    assert!(!grid.is_empty(), "coverage grid must be nonempty");
    let total: f64 = grid
        .iter()
        .map(|x| model::conditional_cdf(x, endpoint(x), noise))
        .sum();
    (total / grid.len() as f64).clamp(0.0, 1.0)
}
