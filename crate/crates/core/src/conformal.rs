//! Conformity scores, calibration of the additive correction, and interval construction.
//!
//! A correction `q_hat` is calibrated on scores of a held-out set and added to
//! new predictions:
//!
//! - unilateral score `y - pred`, interval `(y_min, pred + q_hat]`;
//! - bilateral score `max(lower - y, y - upper)`, interval `[lower - q_hat, upper + q_hat]`.
//!
//! The classical correction is the order statistic `ceil((n + 1)(1 - alpha))`
//! and is infinite once that index exceeds `n`. The GPD methods extrapolate
//! instead; the confidence-interval variants bound the `(1 - alpha1)` score
//! quantile at confidence `1 - alpha2`, with `(1 - alpha1)(1 - alpha2) >= 1 - alpha`.

use crate::gpd::{GpdError, TailModel};
use crate::quantile_ci::{
    bootstrap_upper_with_fit, delta_upper_with_fit, profile_upper_with_fit, CiError, CiRequest,
    CiResult, CiStatus, FittedQuantile,
};
use crate::sample::{ceil_index, floor_index, ScoreSample};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConformalError {
    #[error("lower prediction {lower} exceeds upper prediction {upper}")]
    InvertedPredictions { lower: f64, upper: f64 },
    #[error("correction is {correction} but predictions are {predictions}")]
    SidednessMismatch {
        correction: Sidedness,
        predictions: Sidedness,
    },
    #[error("alpha={alpha} is too small for a non-degenerate coverage law with n={n}")]
    DegenerateLevel { alpha: f64, n: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("corrected interval is empty: lower {lower} > upper {upper}")]
    EmptyInterval { lower: f64, upper: f64 },
    #[error(transparent)]
    Gpd(#[from] GpdError),
    #[error(transparent)]
    Ci(#[from] CiError),
}

impl ConformalError {
    /// True for failures of the tail fit or interval estimation, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            ConformalError::Gpd(_)
                | ConformalError::Ci(CiError::Gpd(_) | CiError::DegenerateBootstrap { .. })
        )
    }

    /// Short snake_case identifier, stable across releases.
    pub fn code(&self) -> &'static str {
        let gpd = |e: &GpdError| match e {
            GpdError::InvalidParams { .. } => "invalid_params",
            GpdError::SupportViolation { .. } => "support_violation",
            GpdError::TooFewExceedances { .. } => "too_few_exceedances",
            GpdError::NonConvergence(_) => "non_convergence",
            GpdError::NotExtrapolating { .. } => "not_extrapolating",
            GpdError::BelowThreshold { .. } => "below_threshold",
            GpdError::InvalidLevel(_) => "invalid_level",
        };
        match self {
            ConformalError::InvertedPredictions { .. } => "inverted_predictions",
            ConformalError::SidednessMismatch { .. } => "sidedness_mismatch",
            ConformalError::DegenerateLevel { .. } => "degenerate_level",
            ConformalError::InvalidAlpha(_) => "invalid_alpha",
            ConformalError::EmptyInterval { .. } => "empty_interval",
            ConformalError::Gpd(e) | ConformalError::Ci(CiError::Gpd(e)) => gpd(e),
            ConformalError::Ci(CiError::InvalidRequest(_)) => "invalid_request",
            ConformalError::Ci(CiError::DegenerateBootstrap { .. }) => "degenerate_bootstrap",
        }
    }
}

/// Unilateral score: how far the observation lies above the predicted upper quantile.
pub fn score_unilateral(prediction: f64, observed: f64) -> f64 {
    observed - prediction
}

/// Bilateral score: the larger of the two one-sided deficits against a predicted band.
pub fn score_bilateral(
    lower_pred: f64,
    upper_pred: f64,
    observed: f64,
) -> Result<f64, ConformalError> {
    if lower_pred > upper_pred {
        return Err(ConformalError::InvertedPredictions {
            lower: lower_pred,
            upper: upper_pred,
        });
    }
    Ok((lower_pred - observed).max(observed - upper_pred))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Bonferroni,
    #[default]
    Sidak,
}

impl FromStr for Split {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "bonferroni" => Ok(Split::Bonferroni),
            "sidak" => Ok(Split::Sidak),
            other => Err(format!(
                "unknown split rule '{other}' (expected bonferroni or sidak)"
            )),
        }
    }
}

/// Target miscoverage and its split into quantile and confidence levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceSpec {
    pub alpha: f64,
    pub split: Split,
    pub alpha1: f64,
    pub alpha2: f64,
}

/// Splits `alpha` so that `(1 - alpha1)(1 - alpha2) >= 1 - alpha`.
pub fn split_levels(alpha: f64, split: Split) -> ConfidenceSpec {
    let a = match split {
        Split::Bonferroni => alpha / 2.0,
        // 1 - sqrt(1 - alpha) without cancellation for tiny alpha
        Split::Sidak => -(0.5 * (-alpha).ln_1p()).exp_m1(),
    };
    ConfidenceSpec {
        alpha,
        split,
        alpha1: a,
        alpha2: a,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Classical,
    GpdSimple,
    GpdProfile,
    GpdBootstrap,
    GpdDelta,
    GpdSafeprofile,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Classical,
        Method::GpdSimple,
        Method::GpdProfile,
        Method::GpdBootstrap,
        Method::GpdDelta,
        Method::GpdSafeprofile,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Classical => "classical",
            Method::GpdSimple => "gpd_simple",
            Method::GpdProfile => "gpd_profile",
            Method::GpdBootstrap => "gpd_bootstrap",
            Method::GpdDelta => "gpd_delta",
            Method::GpdSafeprofile => "gpd_safeprofile",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.as_str()).collect();
                format!(
                    "unknown method '{s}' (expected one of {})",
                    names.join(", ")
                )
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    #[default]
    #[serde(rename = "unilateral", alias = "unilateral_upper")]
    UnilateralUpper,
    Bilateral,
}

impl Sidedness {
    pub fn as_str(&self) -> &'static str {
        match self {
            Sidedness::UnilateralUpper => "unilateral",
            Sidedness::Bilateral => "bilateral",
        }
    }
}

impl fmt::Display for Sidedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sidedness {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "unilateral" | "unilateral_upper" => Ok(Sidedness::UnilateralUpper),
            "bilateral" => Ok(Sidedness::Bilateral),
            other => Err(format!(
                "unknown sidedness '{other}' (expected unilateral or bilateral)"
            )),
        }
    }
}

/// A calibrated additive correction with the diagnostics that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalCorrection {
    #[serde(with = "crate::serde_inf")]
    pub q_hat: f64,
    pub method: Method,
    pub finite: bool,
    pub sidedness: Sidedness,
    /// A GPD method was requested but `1 - alpha` is not above the threshold
    /// level, so the classical order statistic was used.
    pub classical_fallback: bool,
    pub tail: Option<TailModel>,
    /// Interval results in the order they were computed (safeprofile may hold two).
    pub ci: Vec<CiResult>,
}

impl ConformalCorrection {
    fn new(q_hat: f64, method: Method) -> Self {
        Self {
            q_hat,
            method,
            finite: q_hat.is_finite(),
            sidedness: Sidedness::default(),
            classical_fallback: false,
            tail: None,
            ci: Vec::new(),
        }
    }

    pub fn with_sidedness(mut self, sidedness: Sidedness) -> Self {
        self.sidedness = sidedness;
        self
    }
}

fn check_alpha(alpha: f64) -> Result<(), ConformalError> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(ConformalError::InvalidAlpha(alpha))
    }
}

/// Classical split-conformal correction: the order statistic `ceil((n+1)(1-alpha))`,
/// or `+inf` when that index exceeds `n`.
pub fn classical_correction(
    scores: &ScoreSample,
    alpha: f64,
) -> Result<ConformalCorrection, ConformalError> {
    check_alpha(alpha)?;
    let n = scores.len();
    let k = ceil_index((n as f64 + 1.0) * (1.0 - alpha));
    let q_hat = if k <= n {
        scores.order_stat(k.max(1))
    } else {
        f64::INFINITY
    };
    Ok(ConformalCorrection::new(q_hat, Method::Classical))
}

/// Settings of a calibration run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationConfig {
    pub method: Method,
    pub tau0: f64,
    pub split: Split,
    pub bootstrap_reps: usize,
    pub seed: u64,
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            method: Method::GpdSafeprofile,
            tau0: 0.95,
            split: Split::Sidak,
            bootstrap_reps: 1000,
            seed: 0,
        }
    }
}

/// Calibrates the correction for miscoverage `alpha` with `config.method`.
///
/// GPD methods need `1 - alpha > tau0`; otherwise they fall back to the
/// classical order statistic. Profile failures inside safeprofile are not
/// errors: the bootstrap endpoint is used instead.
pub fn extreme_correction(
    scores: &ScoreSample,
    alpha: f64,
    config: &CalibrationConfig,
) -> Result<ConformalCorrection, ConformalError> {
    check_alpha(alpha)?;
    if config.method == Method::Classical {
        return classical_correction(scores, alpha);
    }
    if 1.0 - alpha <= config.tau0 {
        let mut c = classical_correction(scores, alpha)?;
        c.method = config.method;
        c.classical_fallback = true;
        return Ok(c);
    }

    if config.method == Method::GpdSimple {
        let fitted = FittedQuantile::new(scores, config.tau0, 1.0 - alpha)?;
        let mut c = ConformalCorrection::new(fitted.point_estimate, Method::GpdSimple);
        c.tail = Some(fitted.model);
        return Ok(c);
    }

    let levels = split_levels(alpha, config.split);
    let req = CiRequest {
        sample: scores,
        tau0: config.tau0,
        quantile_level: 1.0 - levels.alpha1,
        ci_level: 1.0 - levels.alpha2,
        bootstrap_reps: config.bootstrap_reps,
        seed: config.seed,
    };
    let fitted = FittedQuantile::new(scores, req.tau0, req.quantile_level)?;
    let ci = match config.method {
        Method::GpdProfile => vec![profile_upper_with_fit(&req, &fitted)],
        Method::GpdBootstrap => vec![bootstrap_upper_with_fit(&req, &fitted)?],
        Method::GpdDelta => vec![delta_upper_with_fit(&req, &fitted)],
        Method::GpdSafeprofile => {
            let profile = profile_upper_with_fit(&req, &fitted);
            if profile.status == CiStatus::Ok && profile.upper_endpoint.is_finite() {
                vec![profile]
            } else {
                vec![profile, bootstrap_upper_with_fit(&req, &fitted)?]
            }
        }
        Method::Classical | Method::GpdSimple => unreachable!("handled above"),
    };
    let last = ci.last().expect("at least one interval result");
    let mut c = ConformalCorrection::new(last.upper_endpoint, config.method);
    c.tail = Some(fitted.model);
    c.ci = ci;
    Ok(c)
}

/// The GPD point estimate of the score quantile at `level`, for comparisons.
pub fn gpd_point_quantile(scores: &ScoreSample, tau0: f64, level: f64) -> Result<f64, GpdError> {
    Ok(FittedQuantile::new(scores, tau0, level)?.point_estimate)
}

/// Model output for one test point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Predictions {
    /// Predicted upper quantile.
    Unilateral(f64),
    /// Predicted lower and upper quantiles.
    Bilateral { lower: f64, upper: f64 },
}

impl Predictions {
    pub fn sidedness(&self) -> Sidedness {
        match self {
            Predictions::Unilateral(_) => Sidedness::UnilateralUpper,
            Predictions::Bilateral { .. } => Sidedness::Bilateral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictionInterval {
    #[serde(with = "crate::serde_inf")]
    pub lower: f64,
    #[serde(with = "crate::serde_inf")]
    pub upper: f64,
    pub sidedness: Sidedness,
}

impl PredictionInterval {
    pub fn contains(&self, y: f64) -> bool {
        match self.sidedness {
            Sidedness::UnilateralUpper => y > self.lower && y <= self.upper,
            Sidedness::Bilateral => y >= self.lower && y <= self.upper,
        }
    }

    pub fn is_trivial(&self) -> bool {
        self.lower == f64::NEG_INFINITY && self.upper == f64::INFINITY
    }
}

/// Applies a correction to predictions. Unilateral intervals are `(y_min, pred + q_hat]`,
/// bilateral ones `[lower - q_hat, upper + q_hat]`; an infinite correction gives the
/// trivial interval.
pub fn build_interval(
    predictions: Predictions,
    correction: &ConformalCorrection,
    y_min: f64,
) -> Result<PredictionInterval, ConformalError> {
    let sidedness = predictions.sidedness();
    if sidedness != correction.sidedness {
        return Err(ConformalError::SidednessMismatch {
            correction: correction.sidedness,
            predictions: sidedness,
        });
    }
    let q = correction.q_hat;
    let (lower, upper) = match predictions {
        Predictions::Unilateral(pred) => {
            let upper = if q == f64::INFINITY { q } else { pred + q };
            (y_min, upper)
        }
        Predictions::Bilateral { lower, upper } => {
            if lower > upper {
                return Err(ConformalError::InvertedPredictions { lower, upper });
            }
            if q == f64::INFINITY {
                (f64::NEG_INFINITY, f64::INFINITY)
            } else {
                (lower - q, upper + q)
            }
        }
    };
    if lower > upper {
        return Err(ConformalError::EmptyInterval { lower, upper });
    }
    Ok(PredictionInterval {
        lower,
        upper,
        sidedness,
    })
}

/// Parameters `(n + 1 - l, l)` of the Beta law of the conditional coverage of the
/// classical interval, with `l = floor((n + 1) alpha)`.
pub fn coverage_beta_params(n_c: usize, alpha: f64) -> Result<(usize, usize), ConformalError> {
    check_alpha(alpha)?;
    let l = floor_index((n_c as f64 + 1.0) * alpha);
    if l == 0 || l > n_c {
        return Err(ConformalError::DegenerateLevel { alpha, n: n_c });
    }
    Ok((n_c + 1 - l, l))
}
