//! Declarative study grids.
//!
//! ```toml
//! seed = 20240901
//! test_grid_size = 4096      # optional, default 4096
//! grid_seed = 7              # optional, defaults to `seed`
//!
//! [[cell]]
//! name = "t_n1000"           # optional
//! noise = "student_t"        # or "gaussian"
//! n_cal = 1000
//! log10_alphas = [-3, -4.5]  # and/or `alphas = [1e-3]`
//! methods = ["classical", "gpd_simple", "gpd_profile"]
//! repetitions = 100
//! tau0 = 0.95                # optional
//! split = "sidak"            # optional, or "bonferroni"
//! bootstrap_reps = 1000      # optional
//! prediction_source = "ground_truth"   # or "external_file"
//! prediction_file = "preds.csv"        # required for external_file
//! ```

use super::model::NoiseModel;
use super::SimError;
use crate::conformal::{Method, Split};
use crate::quantile_ci::MIN_BOOTSTRAP_REPS;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

pub const DEFAULT_TEST_GRID: usize = 4096;
pub const MIN_CALIBRATION: usize = 100;

fn default_grid() -> usize {
    DEFAULT_TEST_GRID
}
fn default_tau0() -> f64 {
    0.95
}
fn default_boot() -> usize {
    1000
}
fn default_train() -> usize {
    5000
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredictionSource {
    /// True conditional quantiles of the generating model.
    #[default]
    GroundTruth,
    /// Predictions read from a file keyed by alpha, repetition, set and index.
    ExternalFile,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub noise: NoiseModel,
    pub n_cal: usize,
    /// Training-set size of the external model; recorded, not used in-process.
    #[serde(default = "default_train")]
    pub n_train: usize,
    #[serde(default)]
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub log10_alphas: Vec<f64>,
    pub methods: Vec<Method>,
    pub repetitions: usize,
    #[serde(default = "default_tau0")]
    pub tau0: f64,
    #[serde(default)]
    pub split: Split,
    #[serde(default = "default_boot")]
    pub bootstrap_reps: usize,
    #[serde(default)]
    pub prediction_source: PredictionSource,
    #[serde(default)]
    pub prediction_file: Option<PathBuf>,
}

impl CellConfig {
    /// Explicit alphas followed by `10^e` for each entry of `log10_alphas`.
    pub fn alpha_values(&self) -> Vec<f64> {
        self.alphas
            .iter()
            .copied()
            .chain(self.log10_alphas.iter().map(|e| 10f64.powf(*e)))
            .collect()
    }

    pub fn label(&self, index: usize) -> String {
        self.name.clone().unwrap_or_else(|| format!("cell{index}"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub seed: u64,
    #[serde(default = "default_grid")]
    pub test_grid_size: usize,
    #[serde(default)]
    pub grid_seed: Option<u64>,
    #[serde(rename = "cell")]
    pub cells: Vec<CellConfig>,
}

impl StudyConfig {
    pub fn from_toml(text: &str) -> Result<Self, SimError> {
        let cfg: Self = toml::from_str(text).map_err(|e| SimError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; relative prediction-file paths resolve against its directory.
    pub fn from_path(path: &Path) -> Result<Self, SimError> {
        let text = std::fs::read_to_string(path)?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        for cell in &mut cfg.cells {
            if let Some(f) = &cell.prediction_file {
                if f.is_relative() {
                    cell.prediction_file = Some(base.join(f));
                }
            }
        }
        Ok(cfg)
    }

    pub fn grid_seed(&self) -> u64 {
        self.grid_seed.unwrap_or(self.seed)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |msg: String| Err(SimError::Config(msg));
        if self.cells.is_empty() {
            return bad("config declares no [[cell]] entries".into());
        }
        if self.test_grid_size == 0 {
            return bad("test_grid_size must be positive".into());
        }
        let mut labels = std::collections::HashSet::new();
        for (i, c) in self.cells.iter().enumerate() {
            let label = c.label(i);
            let safe = |ch: char| ch.is_ascii_alphanumeric() || ch == '_' || ch == '-' || ch == '.';
            if label.is_empty() || label.starts_with('.') || !label.chars().all(safe) {
                return bad(format!("cell name '{label}' must use [A-Za-z0-9_.-]"));
            }
            if !labels.insert(label.clone()) {
                return bad(format!("duplicate cell name '{label}'"));
            }
            if c.n_cal < MIN_CALIBRATION {
                return bad(format!(
                    "{label}: n_cal {} is below {MIN_CALIBRATION}",
                    c.n_cal
                ));
            }
            if c.repetitions == 0 {
                return bad(format!("{label}: repetitions must be at least 1"));
            }
            if c.methods.is_empty() {
                return bad(format!("{label}: no methods listed"));
            }
            let alphas = c.alpha_values();
            if alphas.is_empty() {
                return bad(format!("{label}: no alphas listed"));
            }
            if let Some(a) = alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
                return bad(format!("{label}: alpha {a} not in (0, 1)"));
            }
            if !(c.tau0 > 0.0 && c.tau0 < 1.0) {
                return bad(format!("{label}: tau0 {} not in (0, 1)", c.tau0));
            }
            let boots = c
                .methods
                .iter()
                .any(|m| matches!(m, Method::GpdBootstrap | Method::GpdSafeprofile));
            if boots && c.bootstrap_reps < MIN_BOOTSTRAP_REPS {
                return bad(format!(
                    "{label}: bootstrap_reps {} is below {MIN_BOOTSTRAP_REPS}",
                    c.bootstrap_reps
                ));
            }
            match (c.prediction_source, &c.prediction_file) {
                (PredictionSource::ExternalFile, None) => {
                    return bad(format!(
                        "{label}: external_file source needs prediction_file"
                    ))
                }
                (PredictionSource::GroundTruth, Some(_)) => {
                    return bad(format!(
                        "{label}: prediction_file given but prediction_source is ground_truth"
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// One scenario per cell x alpha x method, in that nesting order.
    pub fn scenarios(&self) -> Vec<SimScenario> {
        let mut out = Vec::new();
        for (ci, c) in self.cells.iter().enumerate() {
            for (ai, alpha) in c.alpha_values().into_iter().enumerate() {
                for &method in &c.methods {
                    out.push(SimScenario {
                        cell_index: ci,
                        cell_name: c.label(ci),
                        alpha_index: ai,
                        noise: c.noise,
                        n_train: c.n_train,
                        n_cal: c.n_cal,
                        alpha,
                        method,
                        repetitions: c.repetitions,
                        prediction_source: c.prediction_source,
                        seed: self.seed,
                        tau0: c.tau0,
                        split: c.split,
                        bootstrap_reps: c.bootstrap_reps,
                        test_grid_size: self.test_grid_size,
                    });
                }
            }
        }
        out
    }
}

/// One cell of the study grid: a noise model, calibration size, level and method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimScenario {
    pub cell_index: usize,
    pub cell_name: String,
    pub alpha_index: usize,
    pub noise: NoiseModel,
    pub n_train: usize,
    pub n_cal: usize,
    pub alpha: f64,
    pub method: Method,
    pub repetitions: usize,
    pub prediction_source: PredictionSource,
    pub seed: u64,
    pub tau0: f64,
    pub split: Split,
    pub bootstrap_reps: usize,
    pub test_grid_size: usize,
}
