//! Conformal prediction intervals at extreme confidence levels.
//!
//! Classical split conformal calibration breaks down once the target
//! miscoverage `alpha` falls below `1 / (n_c + 1)`: the required order
//! statistic does not exist and the correction is infinite. This crate
//! extrapolates the calibration-score quantile with a generalized Pareto
//! tail model instead, optionally taking the upper endpoint of a confidence
//! interval for a slightly higher quantile so that the combined levels keep
//! the marginal coverage target.
//!
//! - [`gpd`]: peaks-over-threshold fitting and tail quantiles.
//! - [`quantile_ci`]: profile-likelihood, bootstrap and delta-method upper endpoints.
//! - [`conformal`]: scores, calibration methods and interval construction.
//! - [`simlab`]: the simulation harness with analytic test coverage.

pub mod conformal;
pub mod dist;
pub mod gpd;
pub mod optim;
pub mod quantile_ci;
pub mod sample;
pub mod serde_inf;
pub mod simlab;

pub use conformal::{
    CalibrationConfig, ConfidenceSpec, ConformalCorrection, ConformalError, Method,
    PredictionInterval, Predictions, Sidedness, Split,
};
pub use gpd::{GpdError, GpdFit, GpdParams, TailModel};
pub use quantile_ci::{CiError, CiMethod, CiRequest, CiResult, CiStatus};
pub use sample::{SampleError, ScoreSample};
