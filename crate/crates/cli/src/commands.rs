use crate::artifact::{CorrectionArtifact, TOOL};
use crate::error::CliError;
use crate::table::Table;
use crate::{CalibrateArgs, DesignArgs, EvaluateArgs, PredictArgs, SimulateArgs};
use extreme_conformal::conformal::{
    build_interval, extreme_correction, score_bilateral, score_unilateral, split_levels,
};
use extreme_conformal::quantile_ci::MIN_BOOTSTRAP_REPS;
use extreme_conformal::serde_inf::format_value;
use extreme_conformal::simlab::{self, StudyConfig};
use extreme_conformal::{
    CalibrationConfig, ConformalCorrection, Method, Predictions, ScoreSample, Sidedness,
};
use log::{debug, info};
use sha2::{Digest, Sha256};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

fn check_unit(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(CliError::usage(format!(
            "--{name} must lie in (0, 1), got {v}"
        )))
    }
}

/// Scores and sidedness from a calibration table.
pub fn calibration_scores(
    table: &Table,
    flag: Option<Sidedness>,
) -> Result<(Vec<f64>, Sidedness), CliError> {
    let (scores, found) =
        if table.has("lower_pred") && table.has("upper_pred") && table.has("observed") {
            let lo = table.column("lower_pred", true)?;
            let hi = table.column("upper_pred", true)?;
            let y = table.column("observed", true)?;
            let s = lo
                .iter()
                .zip(&hi)
                .zip(&y)
                .map(|((l, u), y)| score_bilateral(*l, *u, *y))
                .collect::<Result<Vec<_>, _>>()?;
            (s, Some(Sidedness::Bilateral))
        } else if table.has("prediction") && table.has("observed") {
            let p = table.column("prediction", true)?;
            let y = table.column("observed", true)?;
            let s = p
                .iter()
                .zip(&y)
                .map(|(p, y)| score_unilateral(*p, *y))
                .collect();
            (s, Some(Sidedness::UnilateralUpper))
        } else if table.has("score") {
            (table.column("score", true)?, None)
        } else {
            return Err(CliError::data(
            "schema",
            "expected columns `score`, `prediction,observed` or `lower_pred,upper_pred,observed`",
        ));
        };
    let sidedness = match (found, flag) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::usage(format!(
                "--sidedness {b} contradicts the {a} input schema"
            )))
        }
        (Some(a), _) => a,
        (None, b) => b.unwrap_or_default(),
    };
    Ok((scores, sidedness))
}

fn summary_line(c: &ConformalCorrection) -> String {
    let mut parts = vec![
        format!("method={}", c.method),
        format!("q_hat={}", format_value(c.q_hat)),
        format!("finite={}", c.finite),
    ];
    if let Some(t) = &c.tail {
        parts.push(format!("exceedances={}", t.n_exceed));
        parts.push(format!("scale={}", t.params.scale()));
        parts.push(format!("shape={}", t.params.shape()));
    }
    if c.classical_fallback {
        parts.push("classical_fallback=true".into());
    }
    if !c.ci.is_empty() {
        let s: Vec<_> = c.ci.iter().map(|r| r.status.as_str()).collect();
        parts.push(format!("status={}", s.join(",")));
    }
    parts.join(" ")
}

pub fn calibrate(a: &CalibrateArgs) -> Result<(), CliError> {
    check_unit("alpha", a.alpha)?;
    check_unit("tau0", a.tau0)?;
    if matches!(a.method, Method::GpdBootstrap | Method::GpdSafeprofile)
        && a.boot_reps < MIN_BOOTSTRAP_REPS
    {
        return Err(CliError::usage(format!(
            "--boot-reps must be at least {MIN_BOOTSTRAP_REPS}"
        )));
    }
    let bytes = std::fs::read(&a.input)
        .map_err(|e| CliError::data("io", format!("{}: {e}", a.input.display())))?;
    let table = Table::parse(&bytes, &a.input.display().to_string())?;
    let (scores, sidedness) = calibration_scores(&table, a.sidedness)?;
    let sample = ScoreSample::new(scores)?;
    debug!("{} calibration scores, {sidedness}", sample.len());

    let settings = CalibrationConfig {
        method: a.method,
        tau0: a.tau0,
        split: a.split,
        bootstrap_reps: a.boot_reps,
        seed: a.seed,
    };
    let correction = extreme_correction(&sample, a.alpha, &settings)?.with_sidedness(sidedness);
    let artifact = CorrectionArtifact {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        created_unix: SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_secs()),
        input_sha256: hex::encode(Sha256::digest(&bytes)),
        n_scores: sample.len(),
        sidedness,
        spec: split_levels(a.alpha, a.split),
        settings,
        correction,
    };
    std::fs::write(&a.output, artifact.to_json()?)?;

    let c = &artifact.correction;
    println!("{}", summary_line(c));
    if !c.finite {
        eprintln!("xcp: warning: correction is infinite; every interval will be trivial");
    }
    if c.tail.as_ref().is_some_and(|t| t.is_unstable()) {
        eprintln!("xcp: warning: tail fit rests on fewer than 30 exceedances");
    }
    Ok(())
}

pub fn predict(a: &PredictArgs) -> Result<(), CliError> {
    let artifact = CorrectionArtifact::load(&a.artifact)?;
    let table = Table::read(&a.input)?;
    let preds: Vec<Predictions> = if table.has("lower_pred") && table.has("upper_pred") {
        let lo = table.column("lower_pred", true)?;
        let hi = table.column("upper_pred", true)?;
        lo.into_iter()
            .zip(hi)
            .map(|(lower, upper)| Predictions::Bilateral { lower, upper })
            .collect()
    } else if table.has("prediction") {
        table
            .column("prediction", true)?
            .into_iter()
            .map(Predictions::Unilateral)
            .collect()
    } else {
        return Err(CliError::data(
            "schema",
            "expected a `prediction` column or `lower_pred,upper_pred`",
        ));
    };

    let intervals = preds
        .into_iter()
        .map(|p| build_interval(p, &artifact.correction, a.y_min))
        .collect::<Result<Vec<_>, _>>()?;

    let mut out: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(std::fs::File::create(p)?),
        None => Box::new(std::io::stdout().lock()),
    };
    let mut w = csv::Writer::from_writer(&mut out);
    w.write_record(["lower", "upper"])?;
    for iv in intervals {
        w.write_record([format_value(iv.lower), format_value(iv.upper)])?;
    }
    w.flush()?;
    if !artifact.correction.finite {
        eprintln!("xcp: warning: infinite correction, all intervals are (-inf, inf)");
    }
    Ok(())
}

/// Coverage statistics of `(lower, upper)` intervals against observations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub n: usize,
    pub exceedances: usize,
    pub coverage: f64,
    pub expected: f64,
    pub ratio: f64,
    pub all_trivial: bool,
}

pub fn evaluation(lower: &[f64], upper: &[f64], observed: &[f64], alpha: f64) -> Evaluation {
    let n = observed.len();
    let exceedances = observed
        .iter()
        .zip(lower.iter().zip(upper))
        .filter(|(y, (l, u))| !(**y >= **l && **y <= **u))
        .count();
    let expected = alpha * n as f64;
    Evaluation {
        n,
        exceedances,
        coverage: 1.0 - exceedances as f64 / n as f64,
        expected,
        ratio: exceedances as f64 / expected,
        all_trivial: lower
            .iter()
            .zip(upper)
            .all(|(l, u)| *l == f64::NEG_INFINITY && *u == f64::INFINITY),
    }
}

pub fn evaluate(a: &EvaluateArgs) -> Result<(), CliError> {
    check_unit("alpha", a.alpha)?;
    let iv = Table::read(&a.intervals)?;
    let obs = Table::read(&a.observations)?;
    let lower = iv.column("lower", false)?;
    let upper = iv.column("upper", false)?;
    let y = obs.column("observed", true)?;
    if lower.len() != y.len() {
        return Err(CliError::data(
            "length_mismatch",
            format!("{} intervals but {} observations", lower.len(), y.len()),
        ));
    }
    if y.is_empty() {
        return Err(CliError::data("empty", "no observations"));
    }
    if let Some(i) = lower.iter().zip(&upper).position(|(l, u)| l > u) {
        return Err(CliError::data(
            "empty_interval",
            format!("interval {} has lower > upper", i + 1),
        ));
    }
    let e = evaluation(&lower, &upper, &y, a.alpha);
    println!(
        "n={} exceedances={} coverage={} expected_exceedances={} ratio={}",
        e.n, e.exceedances, e.coverage, e.expected, e.ratio
    );
    if e.all_trivial {
        eprintln!("xcp: warning: every interval is (-inf, inf); coverage is trivially 1");
    }
    Ok(())
}

fn staging_dir(target: &Path) -> Result<PathBuf, CliError> {
    let name = target.file_name().ok_or_else(|| {
        CliError::usage(format!("invalid output directory '{}'", target.display()))
    })?;
    let parent = target
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    Ok(parent.join(format!(
        ".{}.partial-{}",
        name.to_string_lossy(),
        std::process::id()
    )))
}

pub fn simulate(a: &SimulateArgs) -> Result<(), CliError> {
    let config = StudyConfig::from_path(&a.config)?;
    if a.output_dir.exists() && std::fs::read_dir(&a.output_dir)?.next().is_some() {
        return Err(CliError::usage(format!(
            "output directory '{}' is not empty",
            a.output_dir.display()
        )));
    }
    let staging = staging_dir(&a.output_dir)?;
    std::fs::create_dir_all(&staging)?;
    let run = || -> Result<Vec<simlab::CoverageReport>, CliError> {
        let reports = simlab::run_study(&config, !a.serial)?;
        simlab::write_outputs(&reports, &staging)?;
        Ok(reports)
    };
    let reports = match run() {
        Ok(r) => r,
        Err(e) => {
            let _ = std::fs::remove_dir_all(&staging);
            return Err(e);
        }
    };
    if a.output_dir.exists() {
        std::fs::remove_dir(&a.output_dir)?;
    }
    std::fs::rename(&staging, &a.output_dir)?;
    info!(
        "wrote {} scenarios to {}",
        reports.len(),
        a.output_dir.display()
    );

    for r in &reports {
        let s = r.summary();
        let failures: usize = s
            .status_counts
            .iter()
            .filter(|(k, _)| k.as_str() != "ok")
            .map(|(_, v)| v)
            .sum();
        println!(
            "cell={} alpha={} method={} mean_coverage={} finite_fraction={} non_ok={}",
            r.scenario.cell_name,
            r.scenario.alpha,
            r.scenario.method,
            s.mean.map_or("nan".into(), |m| m.to_string()),
            s.finite_fraction,
            failures
        );
    }
    Ok(())
}

pub fn design(a: &DesignArgs) -> Result<(), CliError> {
    let config = StudyConfig::from_path(&a.config)?;
    let file = std::fs::File::create(&a.output)?;
    simlab::export_design(&config, a.cell, std::io::BufWriter::new(file))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exceedance_ratio() {
        let n = 10_000;
        let lower = vec![f64::NEG_INFINITY; n];
        let upper = vec![1.0; n];
        let mut y = vec![0.0; n];
        y[..10].iter_mut().for_each(|v| *v = 2.0);
        let e = evaluation(&lower, &upper, &y, 1e-3);
        assert_eq!(e.exceedances, 10);
        assert!((e.ratio - 1.0).abs() < 1e-12);
        assert!((e.coverage - 0.999).abs() < 1e-12);
        assert!(!e.all_trivial);
    }

    #[test]
    fn trivial_intervals_cover_everything() {
        let e = evaluation(
            &[f64::NEG_INFINITY; 3],
            &[f64::INFINITY; 3],
            &[1e300, -5.0, 0.0],
            0.1,
        );
        assert_eq!(e.coverage, 1.0);
        assert_eq!(e.ratio, 0.0);
        assert!(e.all_trivial);
    }

    #[test]
    fn schema_detection() {
        let t = Table::parse(b"prediction,observed\n1,2\n", "t").unwrap();
        assert_eq!(
            calibration_scores(&t, None).unwrap(),
            (vec![1.0], Sidedness::UnilateralUpper)
        );
        assert!(calibration_scores(&t, Some(Sidedness::Bilateral)).is_err());
        let t = Table::parse(b"lower_pred,upper_pred,observed\n1,3,5\n", "t").unwrap();
        assert_eq!(
            calibration_scores(&t, None).unwrap(),
            (vec![2.0], Sidedness::Bilateral)
        );
        let t = Table::parse(b"score\n4\n", "t").unwrap();
        assert_eq!(
            calibration_scores(&t, Some(Sidedness::Bilateral))
                .unwrap()
                .1,
            Sidedness::Bilateral
        );
        assert_eq!(
            calibration_scores(&t, None).unwrap().1,
            Sidedness::UnilateralUpper
        );
        let t = Table::parse(b"x\n4\n", "t").unwrap();
        assert!(calibration_scores(&t, None).is_err());
    }
}
