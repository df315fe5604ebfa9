//! Per-repetition records, coverage summaries and their CSV/JSON renderings.

use super::config::SimScenario;
use super::SimError;
use crate::serde_inf;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

pub const CSV_HEADER: [&str; 11] = [
    "cell",
    "cell_name",
    "noise",
    "n_cal",
    "alpha",
    "method",
    "repetition",
    "q_hat",
    "finite",
    "coverage",
    "status",
];

/// Outcome of one repetition: `coverage` is `None` when calibration failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionRecord {
    pub repetition: usize,
    #[serde(with = "crate::serde_inf")]
    pub q_hat: f64,
    pub finite: bool,
    pub coverage: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub scenario: SimScenario,
    pub records: Vec<RepetitionRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageSummary {
    pub repetitions: usize,
    /// Repetitions with a coverage value (calibration succeeded).
    pub evaluated: usize,
    pub mean: Option<f64>,
    pub min: Option<f64>,
    pub q25: Option<f64>,
    pub median: Option<f64>,
    pub q75: Option<f64>,
    pub max: Option<f64>,
    pub finite_fraction: f64,
    pub status_counts: BTreeMap<String, usize>,
}

/// Linear-interpolation quantile of sorted data.
fn interpolated(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

impl CoverageReport {
    pub fn coverages(&self) -> Vec<f64> {
        self.records.iter().filter_map(|r| r.coverage).collect()
    }

    pub fn finite_fraction(&self) -> f64 {
        let finite = self.records.iter().filter(|r| r.finite).count();
        finite as f64 / self.records.len() as f64
    }

    pub fn mean_coverage(&self) -> Option<f64> {
        let c = self.coverages();
        (!c.is_empty()).then(|| c.iter().sum::<f64>() / c.len() as f64)
    }

    pub fn summary(&self) -> CoverageSummary {
        let mut c = self.coverages();
        c.sort_by(f64::total_cmp);
        let q = |p: f64| (!c.is_empty()).then(|| interpolated(&c, p));
        let mut status_counts = BTreeMap::new();
        for r in &self.records {
            *status_counts.entry(r.status.clone()).or_insert(0) += 1;
        }
        CoverageSummary {
            repetitions: self.records.len(),
            evaluated: c.len(),
            mean: self.mean_coverage(),
            min: q(0.0),
            q25: q(0.25),
            median: q(0.5),
            q75: q(0.75),
            max: q(1.0),
            finite_fraction: self.finite_fraction(),
            status_counts,
        }
    }

    fn csv_rows(&self) -> impl Iterator<Item = [String; 11]> + '_ {
        let s = &self.scenario;
        self.records.iter().map(move |r| {
            [
                s.cell_index.to_string(),
                s.cell_name.clone(),
                s.noise.to_string(),
                s.n_cal.to_string(),
                s.alpha.to_string(),
                s.method.to_string(),
                r.repetition.to_string(),
                serde_inf::format_value(r.q_hat),
                r.finite.to_string(),
                r.coverage.map(|c| c.to_string()).unwrap_or_default(),
                r.status.clone(),
            ]
        })
    }
}

/// Renders reports as CSV, one row per scenario x repetition.
pub fn write_csv<W: Write>(reports: &[&CoverageReport], out: W) -> Result<(), SimError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for report in reports {
        for row in report.csv_rows() {
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct ScenarioSummary<'a> {
    scenario: &'a SimScenario,
    summary: CoverageSummary,
}

/// Writes `<cell>.csv` and `<cell>.json` into `dir` for every cell in `reports`.
pub fn write_outputs(reports: &[CoverageReport], dir: &Path) -> Result<(), SimError> {
    let mut cells: BTreeMap<(usize, &str), Vec<&CoverageReport>> = BTreeMap::new();
    for r in reports {
        cells
            .entry((r.scenario.cell_index, r.scenario.cell_name.as_str()))
            .or_default()
            .push(r);
    }
    for ((_, name), group) in cells {
        write_csv(
            &group,
            std::fs::File::create(dir.join(format!("{name}.csv")))?,
        )?;
        let summaries: Vec<ScenarioSummary> = group
            .iter()
            .map(|r| ScenarioSummary {
                scenario: &r.scenario,
                summary: r.summary(),
            })
            .collect();
        let mut f = std::fs::File::create(dir.join(format!("{name}.json")))?;
        serde_json::to_writer_pretty(&mut f, &summaries)?;
        f.write_all(b"\n")?;
    }
    Ok(())
}
