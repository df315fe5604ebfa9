//! Upper confidence endpoints for an extrapolated GPD quantile.
//!
//! Three constructions of the upper endpoint of a two-sided `ci_level`
//! interval for the score quantile at `quantile_level`:
//!
//! - profile likelihood: largest `q` with deviance `2 (l_max - l_prof(q))` at most
//!   the `ci_level` quantile of chi-square(1);
//! - nonparametric percentile bootstrap: the `(1 + ci_level) / 2` percentile of
//!   quantile estimates refitted on resamples of the full score sample;
//! - delta method: `q_hat + z * se` with `se` from the observed information.

use crate::dist::{chi2_1_quantile, normal_quantile};
use crate::gpd::{
    excess_quantile, fit_tail, log_likelihood_unchecked, score_hessian, tail_quantile, GpdError,
    GpdFit, GpdParams, TailModel, SHAPE_MAX, SHAPE_MIN, SHAPE_SWITCH,
};
use crate::optim::{bisect_last_nonpositive, grid_golden_max};
use crate::sample::{ceil_index, ScoreSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Smallest accepted bootstrap resample count.
pub const MIN_BOOTSTRAP_REPS: usize = 200;
/// Profile search gives up once the bracket exceeds this multiple of the sample IQR.
pub const PROFILE_BRACKET_FACTOR: f64 = 1e6;
/// Observed information with a larger condition number is treated as singular.
pub const MAX_CONDITION: f64 = 1e12;

const PROFILE_GRID: usize = 120;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CiError {
    #[error(transparent)]
    Gpd(#[from] GpdError),
    #[error("invalid confidence-interval request: {0}")]
    InvalidRequest(String),
    #[error("{failed} of {total} bootstrap refits failed")]
    DegenerateBootstrap { failed: usize, total: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiMethod {
    Profile,
    Bootstrap,
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CiStatus {
    Ok,
    ProfileUndefined,
    DeltaUnstable,
    DegenerateInput,
}

impl CiStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            CiStatus::Ok => "ok",
            CiStatus::ProfileUndefined => "profile_undefined",
            CiStatus::DeltaUnstable => "delta_unstable",
            CiStatus::DegenerateInput => "degenerate_input",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiResult {
    pub method: CiMethod,
    pub point_estimate: f64,
    #[serde(with = "crate::serde_inf")]
    pub upper_endpoint: f64,
    pub status: CiStatus,
}

#[derive(Debug, Clone, Copy)]
pub struct CiRequest<'a> {
    pub sample: &'a ScoreSample,
    pub tau0: f64,
    /// Level of the score quantile being bounded.
    pub quantile_level: f64,
    /// Confidence level of the two-sided interval.
    pub ci_level: f64,
    pub bootstrap_reps: usize,
    pub seed: u64,
}

impl CiRequest<'_> {
    fn validate(&self) -> Result<(), CiError> {
        if !(self.tau0 > 0.0 && self.tau0 < 1.0) {
            return Err(CiError::InvalidRequest(format!(
                "tau0 {} not in (0,1)",
                self.tau0
            )));
        }
        if !(self.quantile_level > self.tau0 && self.quantile_level < 1.0) {
            return Err(CiError::InvalidRequest(format!(
                "quantile level {} must lie in (tau0, 1) = ({}, 1)",
                self.quantile_level, self.tau0
            )));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(CiError::InvalidRequest(format!(
                "ci level {} not in (0,1)",
                self.ci_level
            )));
        }
        Ok(())
    }
}

/// The GPD fit of a request together with its point estimate.
#[derive(Debug, Clone, Copy)]
pub struct FittedQuantile {
    pub model: TailModel,
    pub fit: GpdFit,
    pub point_estimate: f64,
}

impl FittedQuantile {
    pub fn new(sample: &ScoreSample, tau0: f64, quantile_level: f64) -> Result<Self, GpdError> {
        let (model, fit) = fit_tail(sample, tau0)?;
        let point_estimate = tail_quantile(
            model.threshold,
            model.tail_prob,
            model.params,
            quantile_level,
        )?;
        Ok(Self {
            model,
            fit,
            point_estimate,
        })
    }
}

// ---------------------------------------------------------------------------
// Profile likelihood
// ---------------------------------------------------------------------------

/// Profile log-likelihood of the extrapolated quantile, with the scale
/// eliminated through the quantile equation.
#[derive(Debug, Clone)]
pub struct ProfileLikelihood {
    exceedances: Vec<f64>,
    threshold: f64,
    log_ratio: f64,
    point_estimate: f64,
    log_lik_max: f64,
}

impl ProfileLikelihood {
    pub fn new(sample: &ScoreSample, tau0: f64, quantile_level: f64) -> Result<Self, GpdError> {
        let fitted = FittedQuantile::new(sample, tau0, quantile_level)?;
        Ok(Self::from_fit(sample, &fitted, quantile_level))
    }

    fn from_fit(sample: &ScoreSample, fitted: &FittedQuantile, quantile_level: f64) -> Self {
        let model = &fitted.model;
        let exceedances = sample
            .values()
            .iter()
            .filter(|&&v| v > model.threshold)
            .map(|&v| v - model.threshold)
            .collect();
        let mut profile = Self {
            exceedances,
            threshold: model.threshold,
            log_ratio: (model.tail_prob / (1.0 - quantile_level)).ln(),
            point_estimate: fitted.point_estimate,
            log_lik_max: fitted.fit.log_likelihood,
        };
        // the profile maximizer can land marginally above the simplex optimum
        let at_point = profile.profile_log_lik(fitted.point_estimate).0;
        if at_point > profile.log_lik_max {
            profile.log_lik_max = at_point;
        }
        profile
    }

    pub fn point_estimate(&self) -> f64 {
        self.point_estimate
    }

    pub fn log_lik_max(&self) -> f64 {
        self.log_lik_max
    }

    /// Scale implied by quantile `q` and shape `shape`.
    fn scale_for(&self, excess: f64, shape: f64) -> f64 {
        // excess_quantile is linear in the scale
        excess / excess_quantile(1.0, shape, self.log_ratio)
    }

    /// Maximum over the shape of the log-likelihood constrained to quantile `q`.
    /// Returns `(log_lik, argmax shape)`.
    pub fn profile_log_lik(&self, q: f64) -> (f64, f64) {
        let excess = q - self.threshold;
        if excess.is_nan() || excess <= 0.0 {
            return (f64::NEG_INFINITY, f64::NAN);
        }
        let f = |shape: f64| {
            let scale = self.scale_for(excess, shape);
            log_likelihood_unchecked(&self.exceedances, scale, shape)
        };
        let (shape, ll) = grid_golden_max(f, SHAPE_MIN, SHAPE_MAX, PROFILE_GRID, 1e-10);
        (ll, shape)
    }

    /// `2 (l_max - l_prof(q))`, `+inf` where the constrained likelihood vanishes.
    pub fn deviance(&self, q: f64) -> f64 {
        let (ll, _) = self.profile_log_lik(q);
        if ll.is_finite() {
            (2.0 * (self.log_lik_max - ll)).max(0.0)
        } else {
            f64::INFINITY
        }
    }

    /// Largest `q >= point_estimate` with deviance at most the chi-square(1)
    /// `ci_level` quantile, or `None` when no crossing occurs within `bound`.
    pub fn upper_crossing(&self, ci_level: f64, step0: f64, bound: f64) -> Option<f64> {
        let crit = chi2_1_quantile(ci_level);
        let g = |q: f64| self.deviance(q) - crit;
        // bisect on the offset from the point estimate so the tolerance
        // follows the data scale, not the location
        let offset = |d: f64| g(self.point_estimate + d);
        let mut lo = 0.0;
        let mut step = step0;
        while step <= bound {
            if offset(step) > 0.0 {
                return Some(
                    self.point_estimate + bisect_last_nonpositive(offset, lo, step, 1e-12),
                );
            }
            lo = step;
            step *= 2.0;
        }
        None
    }
}

/// Profile-likelihood upper endpoint.
pub fn ci_profile_upper(req: &CiRequest) -> Result<CiResult, CiError> {
    req.validate()?;
    let fitted = FittedQuantile::new(req.sample, req.tau0, req.quantile_level)?;
    Ok(profile_upper_with_fit(req, &fitted))
}

pub(crate) fn profile_upper_with_fit(req: &CiRequest, fitted: &FittedQuantile) -> CiResult {
    let profile = ProfileLikelihood::from_fit(req.sample, fitted, req.quantile_level);
    let iqr = req.sample.iqr();
    let scale = if iqr > 0.0 {
        iqr
    } else {
        fitted.point_estimate - fitted.model.threshold
    };
    let crossing =
        profile.upper_crossing(req.ci_level, 0.01 * scale, PROFILE_BRACKET_FACTOR * scale);
    let (upper_endpoint, status) = match crossing {
        Some(q) => (q, CiStatus::Ok),
        None => (f64::INFINITY, CiStatus::ProfileUndefined),
    };
    CiResult {
        method: CiMethod::Profile,
        point_estimate: fitted.point_estimate,
        upper_endpoint,
        status,
    }
}

// ---------------------------------------------------------------------------
// Bootstrap
// ---------------------------------------------------------------------------

/// RNG for bootstrap resample `index`: one ChaCha stream per resample, so the
/// result does not depend on evaluation order.
pub fn resample_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn resample_estimate(req: &CiRequest, index: usize) -> Option<f64> {
    let mut rng = resample_rng(req.seed, index as u64);
    let values = req.sample.values();
    let n = values.len();
    let draw: Vec<f64> = (0..n).map(|_| values[rng.random_range(0..n)]).collect();
    let resample = ScoreSample::new(draw).ok()?;
    let (model, _) = fit_tail(&resample, req.tau0).ok()?;
    tail_quantile(
        model.threshold,
        model.tail_prob,
        model.params,
        req.quantile_level,
    )
    .ok()
}

/// Quantile estimates on `req.bootstrap_reps` resamples; `None` marks failed refits.
pub fn bootstrap_estimates(req: &CiRequest, parallel: bool) -> Vec<Option<f64>> {
    if parallel {
        (0..req.bootstrap_reps)
            .into_par_iter()
            .map(|b| resample_estimate(req, b))
            .collect()
    } else {
        (0..req.bootstrap_reps)
            .map(|b| resample_estimate(req, b))
            .collect()
    }
}

/// Empirical `prob`-percentile (order statistic `ceil(m * prob)`) of `estimates`.
pub fn percentile_upper(estimates: &[f64], prob: f64) -> f64 {
    let mut sorted = estimates.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    sorted[ceil_index(m as f64 * prob).clamp(1, m) - 1]
}

/// Nonparametric percentile-bootstrap upper endpoint.
pub fn ci_bootstrap_upper(req: &CiRequest) -> Result<CiResult, CiError> {
    req.validate()?;
    let fitted = FittedQuantile::new(req.sample, req.tau0, req.quantile_level)?;
    bootstrap_upper_with_fit(req, &fitted)
}

pub(crate) fn bootstrap_upper_with_fit(
    req: &CiRequest,
    fitted: &FittedQuantile,
) -> Result<CiResult, CiError> {
    if req.bootstrap_reps < MIN_BOOTSTRAP_REPS {
        return Err(CiError::InvalidRequest(format!(
            "bootstrap needs at least {MIN_BOOTSTRAP_REPS} resamples, got {}",
            req.bootstrap_reps
        )));
    }
    let estimates: Vec<f64> = bootstrap_estimates(req, true)
        .into_iter()
        .flatten()
        .collect();
    let failed = req.bootstrap_reps - estimates.len();
    if 2 * failed > req.bootstrap_reps {
        return Err(CiError::DegenerateBootstrap {
            failed,
            total: req.bootstrap_reps,
        });
    }
    let percentile = percentile_upper(&estimates, 0.5 + 0.5 * req.ci_level);
    Ok(CiResult {
        method: CiMethod::Bootstrap,
        point_estimate: fitted.point_estimate,
        upper_endpoint: percentile.max(fitted.point_estimate),
        status: CiStatus::Ok,
    })
}

// ---------------------------------------------------------------------------
// Delta method
// ---------------------------------------------------------------------------

/// Gradient of the extrapolated quantile with respect to `(scale, shape)`,
/// threshold and exceedance fraction held fixed.
pub fn quantile_gradient(tail_prob: f64, level: f64, params: GpdParams) -> [f64; 2] {
    let log_ratio = (tail_prob / (1.0 - level)).ln();
    let (scale, shape) = (params.scale(), params.shape());
    let t = shape * log_ratio;
    let d_scale = if shape.abs() < SHAPE_SWITCH {
        log_ratio
    } else {
        t.exp_m1() / shape
    };
    // (t e^t - (e^t - 1)) / t^2, with its Taylor series near 0
    let h = if t.abs() < 1e-3 {
        0.5 + t * (1.0 / 3.0 + t * (1.0 / 8.0 + t * (1.0 / 30.0 + t / 144.0)))
    } else {
        (t * t.exp() - t.exp_m1()) / (t * t)
    };
    [d_scale, scale * log_ratio * log_ratio * h]
}

/// Observed information `-H` of the exceedance log-likelihood in `(scale, shape)`,
/// differencing the analytic score with steps `1e-4 * scale` and `1e-4`.
pub fn observed_information(exceedances: &[f64], params: GpdParams) -> [[f64; 2]; 2] {
    let h = score_hessian(exceedances, params.scale(), params.shape(), 1e-4);
    [[-h[0][0], -h[0][1]], [-h[1][0], -h[1][1]]]
}

/// Delta-method upper endpoint from a gradient and an information matrix.
///
/// Returns `(+inf, DeltaUnstable)` when the information is not positive definite
/// or its condition number exceeds [`MAX_CONDITION`].
pub fn delta_upper_from_information(
    point_estimate: f64,
    gradient: [f64; 2],
    info: [[f64; 2]; 2],
    ci_level: f64,
) -> (f64, CiStatus) {
    let unstable = (f64::INFINITY, CiStatus::DeltaUnstable);
    let (a, b, d) = (info[0][0], 0.5 * (info[0][1] + info[1][0]), info[1][1]);
    if ![a, b, d].iter().all(|v| v.is_finite()) {
        return unstable;
    }
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (lam_max, lam_min) = (mid + rad, mid - rad);
    if lam_min.is_nan() || lam_min <= 0.0 || lam_max / lam_min > MAX_CONDITION {
        return unstable;
    }
    let det = a * d - b * b;
    let [g0, g1] = gradient;
    let variance = (d * g0 * g0 - 2.0 * b * g0 * g1 + a * g1 * g1) / det;
    if variance.is_nan() || variance < 0.0 {
        return unstable;
    }
    let z = normal_quantile(0.5 + 0.5 * ci_level);
    (point_estimate + z * variance.sqrt(), CiStatus::Ok)
}

/// Delta-method (normal approximation) upper endpoint.
pub fn ci_delta_upper(req: &CiRequest) -> Result<CiResult, CiError> {
    req.validate()?;
    let fitted = FittedQuantile::new(req.sample, req.tau0, req.quantile_level)?;
    Ok(delta_upper_with_fit(req, &fitted))
}

pub(crate) fn delta_upper_with_fit(req: &CiRequest, fitted: &FittedQuantile) -> CiResult {
    let model = &fitted.model;
    let exceedances: Vec<f64> = req
        .sample
        .values()
        .iter()
        .filter(|&&v| v > model.threshold)
        .map(|&v| v - model.threshold)
        .collect();
    let info = observed_information(&exceedances, model.params);
    let gradient = quantile_gradient(model.tail_prob, req.quantile_level, model.params);
    let (upper_endpoint, status) =
        delta_upper_from_information(fitted.point_estimate, gradient, info, req.ci_level);
    CiResult {
        method: CiMethod::Delta,
        point_estimate: fitted.point_estimate,
        upper_endpoint,
        status,
    }
}
