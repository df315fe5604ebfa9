//! The heteroscedastic benchmark model.
//!
//! `X ~ U([-1, 1]^10)` and `Y | X = x ~ scale(x) * eps`, where
//! `scale(x) = 1 + 6 phi(x1, x2)` with `phi` the bivariate normal density with
//! correlation 0.9, and `eps` either standard normal or Student-t with
//! `dof(x) = 7 / (1 + exp(4 x1 + 1.2)) + 3` degrees of freedom.

use crate::dist::{normal_cdf, normal_quantile, student_t_cdf, student_t_quantile};
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

pub const DIM: usize = 10;
const RHO: f64 = 0.9;

pub type Covariates = [f64; DIM];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Student-t noise with covariate-dependent degrees of freedom.
    #[serde(alias = "student_t")]
    StudentTVaryingDf,
    Gaussian,
}

impl NoiseModel {
    pub fn as_str(&self) -> &'static str {
        match self {
            NoiseModel::StudentTVaryingDf => "student_t_varying_df",
            NoiseModel::Gaussian => "gaussian",
        }
    }
}

impl fmt::Display for NoiseModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NoiseModel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "student_t" | "student_t_varying_df" => Ok(NoiseModel::StudentTVaryingDf),
            "gaussian" => Ok(NoiseModel::Gaussian),
            other => Err(format!("unknown noise model '{other}'")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Observation {
    pub x: Covariates,
    pub y: f64,
}

/// Bivariate normal density with unit variances and correlation 0.9.
pub fn bivariate_density(x1: f64, x2: f64) -> f64 {
    let one_m_r2 = 1.0 - RHO * RHO;
    let quad = (x1 * x1 - 2.0 * RHO * x1 * x2 + x2 * x2) / (2.0 * one_m_r2);
    (-quad).exp() / (2.0 * PI * one_m_r2.sqrt())
}

/// Conditional scale `1 + 6 phi(x1, x2)`.
pub fn noise_scale(x: &Covariates) -> f64 {
    1.0 + 6.0 * bivariate_density(x[0], x[1])
}

/// Degrees of freedom of the Student-t noise, in `(3, 10)`.
pub fn tail_dof(x: &Covariates) -> f64 {
    7.0 / (1.0 + (4.0 * x[0] + 1.2).exp()) + 3.0
}

fn noise_quantile(p: f64, x: &Covariates, noise: NoiseModel) -> f64 {
    match noise {
        NoiseModel::StudentTVaryingDf => student_t_quantile(p, tail_dof(x)),
        NoiseModel::Gaussian => normal_quantile(p),
    }
}

/// Conditional quantile of `Y` given `x`.
pub fn true_quantile(x: &Covariates, level: f64, noise: NoiseModel) -> f64 {
    noise_scale(x) * noise_quantile(level, x, noise)
}

/// Conditional CDF of `Y` given `x`; `1` at `+inf`.
pub fn conditional_cdf(x: &Covariates, y: f64, noise: NoiseModel) -> f64 {
    if y == f64::INFINITY {
        return 1.0;
    }
    let z = y / noise_scale(x);
    match noise {
        NoiseModel::StudentTVaryingDf => student_t_cdf(z, tail_dof(x)),
        NoiseModel::Gaussian => normal_cdf(z),
    }
}

/// Draws `y` given `x` by inverse-CDF sampling.
pub fn sample_response<R: Rng + ?Sized>(x: &Covariates, noise: NoiseModel, rng: &mut R) -> f64 {
    let u = open_unit(rng);
    noise_scale(x) * noise_quantile(u, x, noise)
}

fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

pub fn sample_covariates<R: Rng + ?Sized>(rng: &mut R) -> Covariates {
    let mut x = [0.0; DIM];
    for v in &mut x {
        *v = 2.0 * rng.random::<f64>() - 1.0;
    }
    x
}

/// `n` i.i.d. draws of `(x, y)`.
pub fn gen_data<R: Rng + ?Sized>(n: usize, noise: NoiseModel, rng: &mut R) -> Vec<Observation> {
    (0..n)
        .map(|_| {
            let x = sample_covariates(rng);
            let y = sample_response(&x, noise, rng);
            Observation { x, y }
        })
        .collect()
}
