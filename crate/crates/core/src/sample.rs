//! Conformity-score samples and order-statistic indexing.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SampleError {
    #[error("score sample is empty")]
    Empty,
    #[error("score at position {0} is not finite")]
    NonFinite(usize),
}

/// A multiset of finite conformity scores, stored in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct ScoreSample {
    sorted: Vec<f64>,
}

impl ScoreSample {
    pub fn new(mut values: Vec<f64>) -> Result<Self, SampleError> {
        if values.is_empty() {
            return Err(SampleError::Empty);
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(SampleError::NonFinite(i));
        }
        values.sort_by(f64::total_cmp);
        Ok(Self { sorted: values })
    }

    /// Values in ascending order.
    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    /// The `k`-th smallest value, 1-based. `k` must be in `1..=len`.
    pub fn order_stat(&self, k: usize) -> f64 {
        self.sorted[k - 1]
    }

    /// Returns a copy with `shift` added to every score.
    pub fn shifted(&self, shift: f64) -> Self {
        Self {
            sorted: self.sorted.iter().map(|v| v + shift).collect(),
        }
    }

    /// Interquartile range under the inverse-empirical-CDF convention.
    pub fn iqr(&self) -> f64 {
        let n = self.len();
        let q = |p: f64| self.order_stat(ceil_index(n as f64 * p).clamp(1, n));
        q(0.75) - q(0.25)
    }
}

impl TryFrom<Vec<f64>> for ScoreSample {
    type Error = SampleError;

    fn try_from(values: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(values)
    }
}

impl From<ScoreSample> for Vec<f64> {
    fn from(s: ScoreSample) -> Self {
        s.sorted
    }
}

// Index arithmetic such as (n+1)(1-alpha) is meant to be exact; products that
// land within a few ulps of an integer are snapped to it before rounding.
fn snap(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= 1e-9 * x.abs().max(1.0)).then_some(r)
}

/// `ceil(x)` as an index, tolerant to floating-point noise around integers.
pub fn ceil_index(x: f64) -> usize {
    let c = snap(x).unwrap_or_else(|| x.ceil());
    c.max(0.0) as usize
}

/// `floor(x)` as an index, tolerant to floating-point noise around integers.
pub fn floor_index(x: f64) -> usize {
    let f = snap(x).unwrap_or_else(|| x.floor());
    f.max(0.0) as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_input() {
        assert_eq!(ScoreSample::new(vec![]), Err(SampleError::Empty));
        assert_eq!(
            ScoreSample::new(vec![1.0, f64::NAN]),
            Err(SampleError::NonFinite(1))
        );
        assert_eq!(
            ScoreSample::new(vec![f64::INFINITY]),
            Err(SampleError::NonFinite(0))
        );
    }

    #[test]
    fn sorted_and_indexed() {
        let s = ScoreSample::new(vec![3.0, -1.0, 2.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[-1.0, 2.0, 2.0, 3.0]);
        assert_eq!(s.order_stat(1), -1.0);
        assert_eq!(s.order_stat(4), 3.0);
    }

    #[test]
    fn index_rounding_is_noise_tolerant() {
        assert_eq!(ceil_index(101.0 * (1.0 - 1.0 / 101.0)), 100);
        assert_eq!(ceil_index(100.0 * 0.95), 95);
        assert_eq!(ceil_index(90.9), 91);
        assert_eq!(floor_index(101.0 * 0.1), 10);
        assert_eq!(floor_index(1000.0 * 0.009_99), 9);
    }
}
