//! Generalized Pareto peaks-over-threshold modelling of a score tail.
//!
//! Above a threshold `u` the survival function of a score `S` is modelled as
//!
//! ```text
//! P(S > y) = p_u * (1 + shape * (y - u) / scale)_+^(-1/shape),   y >= u,
//! ```
//!
//! with `p_u` the empirical exceedance fraction. Inverting this gives the
//! extrapolated quantile at any level above `1 - p_u`.
//!
//! Every formula switches to its exponential limit when `|shape| < SHAPE_SWITCH`.

use crate::optim::{nelder_mead, NelderMeadOptions};
use crate::sample::{ceil_index, ScoreSample};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Below this absolute shape the exponential-tail limit is used.
pub const SHAPE_SWITCH: f64 = 1e-6;
/// Lower bound of the shape search range.
pub const SHAPE_MIN: f64 = -0.95;
/// Upper bound of the shape search range.
pub const SHAPE_MAX: f64 = 2.0;
/// Fewer exceedances than this is a hard error.
pub const MIN_EXCEEDANCES: usize = 5;
/// Fewer exceedances than this fits, but the fit is flagged as unstable.
pub const STABLE_EXCEEDANCES: usize = 30;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GpdError {
    #[error("invalid GPD parameters: scale={scale}, shape={shape}")]
    InvalidParams { scale: f64, shape: f64 },
    #[error("exceedance {value} at position {index} lies outside the GPD support")]
    SupportViolation { index: usize, value: f64 },
    #[error("{found} exceedances above the threshold, at least {required} are needed")]
    TooFewExceedances { found: usize, required: usize },
    #[error("likelihood maximization did not converge: {0}")]
    NonConvergence(String),
    #[error("level {level} is not above the threshold level {threshold_level}")]
    NotExtrapolating { level: f64, threshold_level: f64 },
    #[error("value {value} lies below the threshold {threshold}")]
    BelowThreshold { value: f64, threshold: f64 },
    #[error("threshold level must be in (0, 1), got {0}")]
    InvalidLevel(f64),
}

/// Scale/shape pair of a generalized Pareto distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpdParams {
    scale: f64,
    shape: f64,
}

impl GpdParams {
    pub fn new(scale: f64, shape: f64) -> Result<Self, GpdError> {
        if !(scale > 0.0 && scale.is_finite() && shape.is_finite()) {
            return Err(GpdError::InvalidParams { scale, shape });
        }
        Ok(Self { scale, shape })
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    /// Upper endpoint of the support of the exceedances (finite only for negative shape).
    pub fn upper_endpoint(&self) -> f64 {
        if self.shape < 0.0 {
            -self.scale / self.shape
        } else {
            f64::INFINITY
        }
    }
}

/// A fitted peaks-over-threshold tail model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailModel {
    pub threshold: f64,
    /// Fraction of the sample strictly above the threshold, `n_exceed / n_total`.
    pub tail_prob: f64,
    pub params: GpdParams,
    pub n_exceed: usize,
    pub n_total: usize,
}

impl TailModel {
    pub fn new(
        threshold: f64,
        params: GpdParams,
        n_exceed: usize,
        n_total: usize,
    ) -> Result<Self, GpdError> {
        if n_exceed == 0 || n_exceed > n_total {
            return Err(GpdError::TooFewExceedances {
                found: n_exceed,
                required: 1,
            });
        }
        Ok(Self {
            threshold,
            tail_prob: n_exceed as f64 / n_total as f64,
            params,
            n_exceed,
            n_total,
        })
    }

    /// Probability level of the threshold, `1 - tail_prob`.
    pub fn threshold_level(&self) -> f64 {
        1.0 - self.tail_prob
    }

    /// True when the fit rests on fewer than [`STABLE_EXCEEDANCES`] points.
    pub fn is_unstable(&self) -> bool {
        self.n_exceed < STABLE_EXCEEDANCES
    }
}

/// Log-density of one exceedance, `-inf` outside the support.
#[inline]
fn log_density(y: f64, scale: f64, shape: f64) -> f64 {
    if y < 0.0 {
        return f64::NEG_INFINITY;
    }
    let z = y / scale;
    if shape.abs() < SHAPE_SWITCH {
        -scale.ln() - z
    } else {
        let t = shape * z;
        if t <= -1.0 {
            return f64::NEG_INFINITY;
        }
        -scale.ln() - (1.0 / shape + 1.0) * t.ln_1p()
    }
}

/// Sum of log-densities, `-inf` as soon as a point leaves the support.
pub(crate) fn log_likelihood_unchecked(exceedances: &[f64], scale: f64, shape: f64) -> f64 {
    if !(scale.is_finite() && scale > 0.0) {
        return f64::NEG_INFINITY;
    }
    let mut acc = 0.0;
    for &y in exceedances {
        let l = log_density(y, scale, shape);
        if l == f64::NEG_INFINITY {
            return l;
        }
        acc += l;
    }
    acc
}

/// Log-likelihood of `exceedances` (values above the threshold, shifted to start at 0).
pub fn gpd_log_likelihood(exceedances: &[f64], params: GpdParams) -> Result<f64, GpdError> {
    for (index, &y) in exceedances.iter().enumerate() {
        if !log_density(y, params.scale, params.shape).is_finite() {
            return Err(GpdError::SupportViolation { index, value: y });
        }
    }
    Ok(log_likelihood_unchecked(
        exceedances,
        params.scale,
        params.shape,
    ))
}

/// Probability-weighted-moment estimates (Hosking & Wallis), clamped into the
/// search box and made feasible for the sample.
pub fn pwm_start(exceedances: &[f64]) -> (f64, f64) {
    let n = exceedances.len() as f64;
    let mut sorted = exceedances.to_vec();
    sorted.sort_by(f64::total_cmp);
    let a0 = sorted.iter().sum::<f64>() / n;
    let a1 = sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| (1.0 - (i as f64 + 1.0 - 0.35) / n) * x)
        .sum::<f64>()
        / n;
    let denom = a0 - 2.0 * a1;
    let (mut scale, mut shape) = if denom > 0.0 {
        (2.0 * a0 * a1 / denom, 2.0 - a0 / denom)
    } else {
        (a0, 0.0)
    };
    shape = shape.clamp(SHAPE_MIN + 0.05, SHAPE_MAX - 0.05);
    if !(scale > 0.0 && scale.is_finite()) {
        scale = a0.max(f64::MIN_POSITIVE);
    }
    let max = sorted.last().copied().unwrap_or(0.0);
    if shape < 0.0 && max >= -scale / shape {
        scale = -shape * max * 1.05;
    }
    (scale, shape)
}

/// Result of a maximum-likelihood GPD fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GpdFit {
    pub params: GpdParams,
    pub log_likelihood: f64,
    /// The shape estimate sits on an edge of `[SHAPE_MIN, SHAPE_MAX]`.
    pub at_shape_bound: bool,
}

fn neg_log_lik_transformed(exceedances: &[f64], p: &[f64]) -> f64 {
    let shape = p[1];
    if !(SHAPE_MIN..=SHAPE_MAX).contains(&shape) {
        return f64::INFINITY;
    }
    -log_likelihood_unchecked(exceedances, p[0].exp(), shape)
}

/// Maximum-likelihood fit of the GPD to strictly positive exceedances.
///
/// Nelder–Mead on `(ln scale, shape)` from the PWM estimates, restarted once at
/// the optimum, with the shape confined to `[SHAPE_MIN, SHAPE_MAX]`. Interior
/// optima are then polished by Newton steps on the analytic score, and the fit
/// is rejected if the score is not numerically zero there.
pub fn fit_gpd_mle(exceedances: &[f64]) -> Result<GpdFit, GpdError> {
    if exceedances.len() < MIN_EXCEEDANCES {
        return Err(GpdError::TooFewExceedances {
            found: exceedances.len(),
            required: MIN_EXCEEDANCES,
        });
    }
    if let Some((index, &value)) = exceedances
        .iter()
        .enumerate()
        .find(|(_, y)| !(**y > 0.0 && y.is_finite()))
    {
        return Err(GpdError::SupportViolation { index, value });
    }
    let first = exceedances[0];
    if exceedances.iter().all(|&y| y == first) {
        return Err(GpdError::NonConvergence(
            "all exceedances are equal; the likelihood is unbounded as shape -> -1".into(),
        ));
    }

    let (scale0, shape0) = pwm_start(exceedances);
    let objective = |p: &[f64]| neg_log_lik_transformed(exceedances, p);
    let opts = NelderMeadOptions::default();
    let first_pass = nelder_mead(objective, &[scale0.ln(), shape0], &[0.2, 0.1], opts);
    let second_pass = nelder_mead(objective, &first_pass.point, &[0.02, 0.02], opts);
    let best = if second_pass.value <= first_pass.value {
        &second_pass
    } else {
        &first_pass
    };
    if !second_pass.converged || !best.value.is_finite() {
        return Err(GpdError::NonConvergence(format!(
            "simplex did not contract after {} iterations",
            first_pass.iterations + second_pass.iterations
        )));
    }

    let shape = best.point[1];
    let at_shape_bound = shape - SHAPE_MIN < 1e-6 || SHAPE_MAX - shape < 1e-6;
    let (mut scale, mut shape) = (best.point[0].exp(), shape);
    if !at_shape_bound {
        (scale, shape) = newton_polish(exceedances, scale, shape);
        let grad = log_likelihood_gradient(exceedances, scale, shape);
        let tol = 1e-6 * exceedances.len() as f64 * (1.0 + 1.0 / scale);
        if grad.iter().any(|g| !g.is_finite() || g.abs() > tol) {
            return Err(GpdError::NonConvergence(format!(
                "score {grad:?} above tolerance {tol:e} at the optimum"
            )));
        }
    }
    Ok(GpdFit {
        params: GpdParams::new(scale, shape)?,
        log_likelihood: log_likelihood_unchecked(exceedances, scale, shape),
        at_shape_bound,
    })
}

/// Analytic score `(d/d scale, d/d shape)` of the exceedance log-likelihood.
pub fn log_likelihood_gradient(exceedances: &[f64], scale: f64, shape: f64) -> [f64; 2] {
    let mut g = [0.0, 0.0];
    for &y in exceedances {
        let z = y / scale;
        let t = shape * z;
        let w = 1.0 + t;
        g[0] += -1.0 / scale + (1.0 + shape) * z / (scale * w);
        g[1] += if t.abs() < 1e-2 {
            // z^2 * sum_j (-t)^j (j+1)/(j+2) - z/w
            let mut series = 0.0;
            let mut pow = 1.0;
            for j in 0..10 {
                series += pow * (j as f64 + 1.0) / (j as f64 + 2.0);
                pow *= -t;
            }
            z * z * series - z / w
        } else {
            w.ln() / (shape * shape) - (1.0 + shape) * z / (shape * w)
        };
    }
    g
}

/// Hessian of the log-likelihood by central differences of the analytic score,
/// with steps `step * scale` and `step`, symmetrized.
pub(crate) fn score_hessian(
    exceedances: &[f64],
    scale: f64,
    shape: f64,
    step: f64,
) -> [[f64; 2]; 2] {
    let h = [step * scale, step];
    let gs_p = log_likelihood_gradient(exceedances, scale + h[0], shape);
    let gs_m = log_likelihood_gradient(exceedances, scale - h[0], shape);
    let gx_p = log_likelihood_gradient(exceedances, scale, shape + h[1]);
    let gx_m = log_likelihood_gradient(exceedances, scale, shape - h[1]);
    let h00 = (gs_p[0] - gs_m[0]) / (2.0 * h[0]);
    let h11 = (gx_p[1] - gx_m[1]) / (2.0 * h[1]);
    let h01 = 0.5 * ((gs_p[1] - gs_m[1]) / (2.0 * h[0]) + (gx_p[0] - gx_m[0]) / (2.0 * h[1]));
    [[h00, h01], [h01, h11]]
}

/// Newton iterations on the score, with the Hessian from central differences of
/// the analytic score and step halving to keep the likelihood from dropping.
fn newton_polish(exceedances: &[f64], scale: f64, shape: f64) -> (f64, f64) {
    let ll = |a: f64, b: f64| log_likelihood_unchecked(exceedances, a, b);
    let mut x = [scale, shape];
    let mut current = ll(x[0], x[1]);
    for _ in 0..30 {
        let g = log_likelihood_gradient(exceedances, x[0], x[1]);
        let [[h00, h01], [_, h11]] = score_hessian(exceedances, x[0], x[1], 1e-6);
        let det = h00 * h11 - h01 * h01;
        // stop unless the Hessian is negative definite
        if !(h00 < 0.0 && det > 0.0) {
            break;
        }
        let mut step = [
            -(h11 * g[0] - h01 * g[1]) / det,
            -(-h01 * g[0] + h00 * g[1]) / det,
        ];
        let mut accepted = false;
        for _ in 0..20 {
            let cand = [x[0] + step[0], x[1] + step[1]];
            let value = ll(cand[0], cand[1]);
            if cand[0] > 0.0
                && (SHAPE_MIN..=SHAPE_MAX).contains(&cand[1])
                && value >= current - 1e-12 * current.abs().max(1.0)
            {
                x = cand;
                current = value.max(current);
                accepted = true;
                break;
            }
            step = [0.5 * step[0], 0.5 * step[1]];
        }
        let small = step[0].abs() <= 1e-15 * x[0] && step[1].abs() <= 1e-15 * x[1].abs().max(1.0);
        if !accepted || small {
            break;
        }
    }
    (x[0], x[1])
}

/// Empirical `tau0`-quantile threshold (order statistic `ceil(n * tau0)`) and
/// the exceedances strictly above it, shifted by the threshold.
pub fn select_threshold(sample: &ScoreSample, tau0: f64) -> Result<(f64, Vec<f64>), GpdError> {
    if !(tau0 > 0.0 && tau0 < 1.0) {
        return Err(GpdError::InvalidLevel(tau0));
    }
    let n = sample.len();
    let idx = ceil_index(n as f64 * tau0).clamp(1, n);
    let threshold = sample.order_stat(idx);
    let exceedances: Vec<f64> = sample.values()[idx..]
        .iter()
        .filter(|&&v| v > threshold)
        .map(|&v| v - threshold)
        .collect();
    if exceedances.len() < MIN_EXCEEDANCES {
        return Err(GpdError::TooFewExceedances {
            found: exceedances.len(),
            required: MIN_EXCEEDANCES,
        });
    }
    Ok((threshold, exceedances))
}

/// Selects the threshold at `tau0` and fits the GPD to the exceedances.
pub fn fit_tail(sample: &ScoreSample, tau0: f64) -> Result<(TailModel, GpdFit), GpdError> {
    let (threshold, exceedances) = select_threshold(sample, tau0)?;
    let fit = fit_gpd_mle(&exceedances)?;
    let model = TailModel::new(threshold, fit.params, exceedances.len(), sample.len())?;
    Ok((model, fit))
}

/// `scale * ((tail_prob / (1 - level))^shape - 1) / shape` written in terms of
/// `log_ratio = ln(tail_prob / (1 - level))`.
#[inline]
pub(crate) fn excess_quantile(scale: f64, shape: f64, log_ratio: f64) -> f64 {
    if shape.abs() < SHAPE_SWITCH {
        scale * log_ratio
    } else {
        scale * (shape * log_ratio).exp_m1() / shape
    }
}

/// Extrapolated quantile from raw tail components; see [`gpd_tail_quantile`].
pub fn tail_quantile(
    threshold: f64,
    tail_prob: f64,
    params: GpdParams,
    level: f64,
) -> Result<f64, GpdError> {
    let threshold_level = 1.0 - tail_prob;
    if !(level > threshold_level && level < 1.0) {
        return Err(GpdError::NotExtrapolating {
            level,
            threshold_level,
        });
    }
    let log_ratio = (tail_prob / (1.0 - level)).ln();
    Ok(threshold + excess_quantile(params.scale, params.shape, log_ratio))
}

/// The GPD estimate of the `level`-quantile of the scores, for `level` above the threshold level.
pub fn gpd_tail_quantile(model: &TailModel, level: f64) -> Result<f64, GpdError> {
    tail_quantile(model.threshold, model.tail_prob, model.params, level)
}

/// Modelled `P(S > y)` for `y` at or above the threshold.
pub fn gpd_survival(model: &TailModel, y: f64) -> Result<f64, GpdError> {
    if y.is_nan() || y < model.threshold {
        return Err(GpdError::BelowThreshold {
            value: y,
            threshold: model.threshold,
        });
    }
    let z = (y - model.threshold) / model.params.scale;
    let shape = model.params.shape;
    let conditional = if shape.abs() < SHAPE_SWITCH {
        (-z).exp()
    } else {
        let t = shape * z;
        if t <= -1.0 {
            0.0
        } else {
            (-t.ln_1p() / shape).exp()
        }
    };
    Ok(model.tail_prob * conditional)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn model(threshold: f64, scale: f64, shape: f64) -> TailModel {
        // 5 of 100 above the threshold: tail_prob = 0.05
        TailModel::new(threshold, GpdParams::new(scale, shape).unwrap(), 5, 100).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(GpdParams::new(0.0, 0.1).is_err());
        assert!(GpdParams::new(-1.0, 0.1).is_err());
        assert!(GpdParams::new(1.0, f64::NAN).is_err());
        assert!(GpdParams::new(f64::INFINITY, 0.1).is_err());
        assert!(GpdParams::new(1.0, -3.0).is_ok());
    }

    #[test]
    fn log_likelihood_trivial_values() {
        let p = GpdParams::new(1.0, 0.0).unwrap();
        assert_relative_eq!(
            gpd_log_likelihood(&[1.0], p).unwrap(),
            -1.0,
            epsilon = 1e-15
        );
        let p = GpdParams::new(2.0, 0.5).unwrap();
        assert_relative_eq!(
            gpd_log_likelihood(&[0.0], p).unwrap(),
            -(2f64.ln()),
            epsilon = 1e-15
        );
    }

    #[test]
    fn log_likelihood_two_points() {
        // -3 ln 1.5 - 3 ln 2, evaluated at 30 digits
        let p = GpdParams::new(1.0, 0.5).unwrap();
        assert_relative_eq!(
            gpd_log_likelihood(&[1.0, 2.0], p).unwrap(),
            -3.295_836_866_004_329,
            epsilon = 1e-14
        );
    }

    #[test]
    fn log_likelihood_support_errors() {
        let p = GpdParams::new(1.0, -0.5).unwrap();
        // upper endpoint is 2
        assert!(matches!(
            gpd_log_likelihood(&[0.5, 2.5], p),
            Err(GpdError::SupportViolation { index: 1, .. })
        ));
        assert!(matches!(
            gpd_log_likelihood(&[-0.1], GpdParams::new(1.0, 0.1).unwrap()),
            Err(GpdError::SupportViolation { index: 0, .. })
        ));
    }

    #[test]
    fn threshold_on_integers() {
        let s = ScoreSample::new((1..=100).map(f64::from).collect()).unwrap();
        let (u, ex) = select_threshold(&s, 0.95).unwrap();
        assert_eq!(u, 95.0);
        assert_eq!(ex, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn threshold_too_few() {
        let s = ScoreSample::new(vec![5.0]).unwrap();
        assert!(matches!(
            select_threshold(&s, 0.95),
            Err(GpdError::TooFewExceedances { found: 0, .. })
        ));
        assert!(matches!(
            select_threshold(&s, 1.0),
            Err(GpdError::InvalidLevel(_))
        ));
    }

    #[test]
    fn ties_at_threshold_are_not_exceedances() {
        let mut v: Vec<f64> = (1..=90).map(f64::from).collect();
        v.extend([95.0; 5]);
        v.extend([96.0, 97.0, 98.0, 99.0, 100.0]);
        let s = ScoreSample::new(v).unwrap();
        let (u, ex) = select_threshold(&s, 0.9).unwrap();
        assert_eq!(u, 90.0);
        assert_eq!(ex.len(), 10);
        let (u, ex) = select_threshold(&s, 0.92).unwrap();
        assert_eq!(u, 95.0);
        assert_eq!(ex, vec![1.0, 2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn quantile_golden_values() {
        let m = model(2.0, 1.0, 0.5);
        let q = gpd_tail_quantile(&m, 0.999).unwrap();
        assert_relative_eq!(q, 2.0 + 2.0 * (50f64.sqrt() - 1.0), epsilon = 1e-12);
        assert!((q - 14.1421).abs() < 1e-4);
        let m0 = model(2.0, 1.0, 0.0);
        let q0 = gpd_tail_quantile(&m0, 0.999).unwrap();
        assert_relative_eq!(q0, 2.0 + 50f64.ln(), epsilon = 1e-12);
        assert!((q0 - 5.9120).abs() < 1e-4);
    }

    #[test]
    fn quantile_requires_extrapolation() {
        let m = model(2.0, 1.0, 0.5);
        assert!(matches!(
            gpd_tail_quantile(&m, 0.95),
            Err(GpdError::NotExtrapolating { .. })
        ));
        assert!(gpd_tail_quantile(&m, 1.0).is_err());
        let near = gpd_tail_quantile(&m, 0.95 + 1e-12).unwrap();
        assert!((near - 2.0).abs() < 1e-9);
    }

    #[test]
    fn survival_values() {
        let m = model(2.0, 1.0, 0.5);
        assert_relative_eq!(gpd_survival(&m, 2.0).unwrap(), 0.05, epsilon = 1e-15);
        let q = 2.0 + 2.0 * (50f64.sqrt() - 1.0);
        assert_relative_eq!(gpd_survival(&m, q).unwrap(), 0.001, max_relative = 1e-12);
        let bounded = model(2.0, 1.0, -0.5);
        assert_eq!(gpd_survival(&bounded, 2.0 + 2.0 + 1e-9).unwrap(), 0.0);
        assert_eq!(gpd_survival(&bounded, 10.0).unwrap(), 0.0);
        assert!(matches!(
            gpd_survival(&m, 1.0),
            Err(GpdError::BelowThreshold { .. })
        ));
    }

    #[test]
    fn shape_continuity_near_zero() {
        for &(scale, level) in &[(0.5, 0.99), (1.0, 0.999), (3.0, 1.0 - 1e-6)] {
            let q0 = gpd_tail_quantile(&model(1.0, scale, 0.0), level).unwrap();
            for &s in &[1e-9, -1e-9] {
                let q = gpd_tail_quantile(&model(1.0, scale, s), level).unwrap();
                assert!((q - q0).abs() < 1e-6 * q0.abs());
            }
            // just outside the switch band the general formula agrees to O(shape)
            let q = gpd_tail_quantile(&model(1.0, scale, 2e-6), level).unwrap();
            assert!((q - q0).abs() < 1e-4 * q0.abs());
        }
    }

    #[test]
    fn fit_rejects_degenerate_and_small() {
        assert!(matches!(
            fit_gpd_mle(&[1.0, 2.0, 3.0]),
            Err(GpdError::TooFewExceedances {
                found: 3,
                required: 5
            })
        ));
        assert!(matches!(
            fit_gpd_mle(&[2.0; 20]),
            Err(GpdError::NonConvergence(_))
        ));
        assert!(matches!(
            fit_gpd_mle(&[1.0, 2.0, 0.0, 3.0, 4.0]),
            Err(GpdError::SupportViolation { index: 2, .. })
        ));
    }

    #[test]
    fn score_matches_finite_differences() {
        let ex = [0.3, 1.1, 0.05, 2.7, 0.8, 4.1, 0.2];
        for &(scale, shape) in &[
            (1.3, 0.4),
            (0.9, -0.2),
            (2.0, 0.004),
            (1.0, -0.0007),
            (1.5, 1.2),
        ] {
            let g = log_likelihood_gradient(&ex, scale, shape);
            let h = 1e-6;
            let ds = (log_likelihood_unchecked(&ex, scale + h, shape)
                - log_likelihood_unchecked(&ex, scale - h, shape))
                / (2.0 * h);
            let dx = (log_likelihood_unchecked(&ex, scale, shape + h)
                - log_likelihood_unchecked(&ex, scale, shape - h))
                / (2.0 * h);
            assert_relative_eq!(g[0], ds, max_relative = 1e-6, epsilon = 1e-7);
            assert_relative_eq!(g[1], dx, max_relative = 1e-6, epsilon = 1e-7);
        }
    }

    #[test]
    fn pwm_is_feasible() {
        let ex = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0];
        let (scale, shape) = pwm_start(&ex);
        assert!(scale > 0.0);
        assert!(log_likelihood_unchecked(&ex, scale, shape).is_finite());
    }
}
