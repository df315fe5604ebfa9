//! Predictions supplied by an outside quantile-regression model.
//!
//! The design file lists the covariates a model must predict at:
//!
//! ```text
//! repetition,set,index,x1,...,x10
//! 0,calibration,0,...
//! ,test,0,...
//! ```
//!
//! Test rows carry an empty repetition because the test grid is shared. The
//! prediction file answers with
//!
//! ```text
//! alpha,repetition,set,index,prediction
//! ```
//!
//! where `alpha` selects one of the cell's levels (matched to 1e-9 relative)
//! and test predictions may be given once with an empty repetition or per
//! repetition.

use super::config::StudyConfig;
use super::grid::halton_grid;
use super::model::DIM;
use super::study::calibration_data;
use super::SimError;
use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DesignSet {
    Calibration,
    Test,
}

impl DesignSet {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "calibration" => Some(DesignSet::Calibration),
            "test" => Some(DesignSet::Test),
            _ => None,
        }
    }
}

type Key = (usize, Option<usize>, DesignSet);

/// Predictions indexed by alpha position, repetition and design set.
#[derive(Debug, Clone, Default)]
pub struct ExternalPredictions {
    table: HashMap<Key, Vec<Option<f64>>>,
}

fn bad(line: usize, msg: impl std::fmt::Display) -> SimError {
    SimError::Predictions(format!("record {line}: {msg}"))
}

impl ExternalPredictions {
    pub fn from_path(path: &Path, alphas: &[f64]) -> Result<Self, SimError> {
        let file = std::fs::File::open(path)
            .map_err(|e| SimError::Predictions(format!("{}: {e}", path.display())))?;
        Self::from_reader(file, alphas)
    }

    pub fn from_reader<R: Read>(input: R, alphas: &[f64]) -> Result<Self, SimError> {
        let mut rdr = csv::Reader::from_reader(input);
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
        if header != ["alpha", "repetition", "set", "index", "prediction"] {
            return Err(SimError::Predictions(format!(
                "expected header alpha,repetition,set,index,prediction, got {}",
                header.join(",")
            )));
        }
        let mut table: HashMap<Key, Vec<Option<f64>>> = HashMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 1;
            let alpha: f64 = rec[0].trim().parse().map_err(|e| bad(line, e))?;
            let Some(a) = alphas
                .iter()
                .position(|v| (v - alpha).abs() <= 1e-9 * v.abs())
            else {
                continue;
            };
            let rep = match rec[1].trim() {
                "" => None,
                s => Some(s.parse::<usize>().map_err(|e| bad(line, e))?),
            };
            let set = DesignSet::parse(rec[2].trim())
                .ok_or_else(|| bad(line, format!("unknown set '{}'", &rec[2])))?;
            if set == DesignSet::Calibration && rep.is_none() {
                return Err(bad(line, "calibration rows need a repetition"));
            }
            let index: usize = rec[3].trim().parse().map_err(|e| bad(line, e))?;
            let value: f64 = rec[4].trim().parse().map_err(|e| bad(line, e))?;
            if !value.is_finite() {
                return Err(bad(line, "prediction is not finite"));
            }
            let slot = table.entry((a, rep, set)).or_default();
            if slot.len() <= index {
                slot.resize(index + 1, None);
            }
            if slot[index].replace(value).is_some() {
                return Err(bad(line, "duplicate prediction"));
            }
        }
        Ok(Self { table })
    }

    /// The `n` predictions for one alpha, repetition and set; test predictions
    /// fall back to the shared (repetition-free) block.
    pub fn get(
        &self,
        alpha_index: usize,
        repetition: usize,
        set: DesignSet,
        n: usize,
    ) -> Result<Vec<f64>, SimError> {
        let block = self
            .table
            .get(&(alpha_index, Some(repetition), set))
            .or_else(|| match set {
                DesignSet::Test => self.table.get(&(alpha_index, None, set)),
                DesignSet::Calibration => None,
            })
            .ok_or_else(|| {
                SimError::Predictions(format!(
                    "no {set:?} predictions for alpha #{alpha_index}, repetition {repetition}"
                ))
            })?;
        if block.len() != n {
            return Err(SimError::Predictions(format!(
                "{set:?} block for alpha #{alpha_index}, repetition {repetition} has {} rows, expected {n}",
                block.len()
            )));
        }
        block
            .iter()
            .enumerate()
            .map(|(i, v)| {
                v.ok_or_else(|| SimError::Predictions(format!("{set:?} prediction {i} missing")))
            })
            .collect()
    }
}

/// Writes the covariates of every calibration set of `cell` and of the shared test grid.
pub fn export_design<W: Write>(config: &StudyConfig, cell: usize, out: W) -> Result<(), SimError> {
    let c = config
        .cells
        .get(cell)
        .ok_or_else(|| SimError::Config(format!("no cell with index {cell}")))?;
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["repetition".to_string(), "set".into(), "index".into()];
    header.extend((1..=DIM).map(|d| format!("x{d}")));
    w.write_record(&header)?;
    let mut write_row = |rep: String, set: &str, i: usize, x: &[f64; DIM]| {
        let mut row = vec![rep, set.to_string(), i.to_string()];
        row.extend(x.iter().map(f64::to_string));
        w.write_record(&row)
    };
    for rep in 0..c.repetitions {
        for (i, obs) in calibration_data(config.seed, cell, rep, c.noise, c.n_cal)
            .iter()
            .enumerate()
        {
            write_row(rep.to_string(), "calibration", i, &obs.x)?;
        }
    }
    for (i, x) in halton_grid(config.test_grid_size, config.grid_seed())
        .iter()
        .enumerate()
    {
        write_row(String::new(), "test", i, x)?;
    }
    w.flush()?;
    Ok(())
}
