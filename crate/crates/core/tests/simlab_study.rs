use extreme_conformal::simlab::{
    export_design, run_study, true_quantile, write_outputs, StudyConfig,
};
use extreme_conformal::Method;
use std::fs;

fn study(text: &str) -> StudyConfig {
    StudyConfig::from_toml(text).unwrap()
}

const SMALL: &str = r#"
seed = 31
test_grid_size = 512
[[cell]]
name = "t300"
noise = "student_t"
n_cal = 300
alphas = [0.1, 1e-3]
methods = ["classical", "gpd_simple", "gpd_profile", "gpd_bootstrap", "gpd_delta", "gpd_safeprofile"]
repetitions = 3
bootstrap_reps = 200
[[cell]]
name = "g500"
noise = "gaussian"
n_cal = 500
log10_alphas = [-2.5]
methods = ["classical", "gpd_safeprofile"]
repetitions = 2
bootstrap_reps = 200
"#;

fn dir_contents(dir: &std::path::Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn outputs_are_byte_identical_across_schedules() {
    let cfg = study(SMALL);
    let runs: Vec<_> = [true, false, true]
        .into_iter()
        .map(|parallel| {
            let dir = tempfile::tempdir().unwrap();
            write_outputs(&run_study(&cfg, parallel).unwrap(), dir.path()).unwrap();
            dir_contents(dir.path())
        })
        .collect();
    assert_eq!(runs[0].len(), 4);
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
}

#[test]
fn reports_follow_scenario_order() {
    let cfg = study(SMALL);
    let reports = run_study(&cfg, true).unwrap();
    assert_eq!(reports.len(), 2 * 6 + 2);
    for (r, s) in reports.iter().zip(cfg.scenarios()) {
        assert_eq!(r.scenario, s);
        assert_eq!(r.records.len(), s.repetitions);
        for (i, rec) in r.records.iter().enumerate() {
            assert_eq!(rec.repetition, i);
        }
    }
    // alpha = 0.1 sits below the threshold level, so GPD methods reuse the classical value
    let classical = &reports[0];
    for r in &reports[1..6] {
        assert!(r.records.iter().all(|x| x.status == "classical_fallback"));
        assert_eq!(
            r.records.iter().map(|x| x.q_hat).collect::<Vec<_>>(),
            classical
                .records
                .iter()
                .map(|x| x.q_hat)
                .collect::<Vec<_>>()
        );
    }
}

#[test]
fn external_truth_file_reproduces_ground_truth() {
    let cfg = study(SMALL);
    let dir = tempfile::tempdir().unwrap();
    let mut external = cfg.clone();
    for (index, cell) in cfg.cells.iter().enumerate() {
        let mut design = Vec::new();
        export_design(&cfg, index, &mut design).unwrap();
        let mut reader = csv::Reader::from_reader(design.as_slice());
        let mut out = csv::Writer::from_path(dir.path().join(format!("{index}.csv"))).unwrap();
        out.write_record(["alpha", "repetition", "set", "index", "prediction"])
            .unwrap();
        for row in reader.records() {
            let row = row.unwrap();
            let mut x = [0.0; 10];
            for (d, v) in x.iter_mut().enumerate() {
                *v = row[3 + d].parse().unwrap();
            }
            for alpha in cell.alpha_values() {
                let pred = true_quantile(&x, 1.0 - alpha, cell.noise);
                out.write_record([
                    &alpha.to_string(),
                    &row[0],
                    &row[1],
                    &row[2],
                    &pred.to_string(),
                ])
                .unwrap();
            }
        }
        out.flush().unwrap();
        let c = &mut external.cells[index];
        c.prediction_source = extreme_conformal::simlab::PredictionSource::ExternalFile;
        c.prediction_file = Some(dir.path().join(format!("{index}.csv")));
    }
    let truth = run_study(&cfg, true).unwrap();
    let from_file = run_study(&external, true).unwrap();
    assert_eq!(truth.len(), from_file.len());
    for (a, b) in truth.iter().zip(&from_file) {
        assert_eq!(a.records.len(), b.records.len());
        for (x, y) in a.records.iter().zip(&b.records) {
            assert_eq!(x.q_hat.to_bits(), y.q_hat.to_bits(), "{:?}", a.scenario);
            assert_eq!(x.coverage.map(f64::to_bits), y.coverage.map(f64::to_bits));
            assert_eq!(x.status, y.status);
        }
    }
}

#[test]
fn missing_external_rows_are_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("preds.csv");
    fs::write(
        &file,
        "alpha,repetition,set,index,prediction\n0.001,0,calibration,0,1.0\n",
    )
    .unwrap();
    let text = format!(
        "seed = 1\ntest_grid_size = 16\n[[cell]]\nnoise = \"gaussian\"\nn_cal = 100\nalphas = [0.001]\n\
         methods = [\"classical\"]\nrepetitions = 1\nprediction_source = \"external_file\"\nprediction_file = {:?}\n",
        file
    );
    assert!(run_study(&study(&text), false).is_err());
}

#[test]
fn invalid_configs_are_rejected() {
    let base = "seed = 1\n[[cell]]\nnoise = \"gaussian\"\nalphas = [0.01]\nrepetitions = 2\n";
    for extra in [
        "n_cal = 50\nmethods = [\"classical\"]\n",
        "n_cal = 500\nmethods = []\n",
        "n_cal = 500\nmethods = [\"gpd_bootstrap\"]\nbootstrap_reps = 50\n",
        "n_cal = 500\nmethods = [\"classical\"]\ntau0 = 1.0\n",
        "n_cal = 500\nmethods = [\"classical\"]\nname = \"../x\"\n",
        "n_cal = 500\nmethods = [\"classical\"]\nprediction_source = \"external_file\"\n",
        "n_cal = 500\nmethods = [\"classical\"]\nunknown_key = 3\n",
        "n_cal = 500\nmethods = [\"quantile_forest\"]\n",
    ] {
        assert!(
            StudyConfig::from_toml(&format!("{base}{extra}")).is_err(),
            "{extra}"
        );
    }
    assert!(
        StudyConfig::from_toml(&format!("{base}n_cal = 500\nmethods = [\"classical\"]\n")).is_ok()
    );
    let twice =
        "seed = 1\n[[cell]]\nname = \"a\"\nnoise = \"gaussian\"\nn_cal = 500\nalphas = [0.01]\n\
                 methods = [\"classical\"]\nrepetitions = 1\n";
    assert!(StudyConfig::from_toml(&format!("{twice}{}", &twice[9..])).is_err());
}

#[test]
fn classical_attains_nominal_coverage_at_moderate_level() {
    let cfg = study(
        r#"
seed = 77
test_grid_size = 1024
[[cell]]
noise = "gaussian"
n_cal = 10000
alphas = [1e-3]
methods = ["classical"]
repetitions = 20
"#,
    );
    let report = &run_study(&cfg, true).unwrap()[0];
    let mean = report.mean_coverage().unwrap();
    assert_eq!(report.finite_fraction(), 1.0);
    // Beta(9991, 10) has sd 3.2e-4 per repetition; allow 3 sd of the 20-run mean
    let slack = 3.0 * 3.2e-4 / 20f64.sqrt();
    assert!(mean >= 1.0 - 1e-3 - slack, "mean coverage {mean}");
}

#[test]
fn profile_beats_point_estimate_in_the_far_tail() {
    let cfg = study(
        r#"
seed = 2718
test_grid_size = 1024
[[cell]]
noise = "student_t"
n_cal = 1000
log10_alphas = [-4.5]
methods = ["gpd_simple", "gpd_profile"]
repetitions = 60
"#,
    );
    let reports = run_study(&cfg, true).unwrap();
    let mean = |m: Method| {
        reports
            .iter()
            .find(|r| r.scenario.method == m)
            .and_then(|r| r.mean_coverage())
            .unwrap()
    };
    let alpha = 10f64.powf(-4.5);
    let simple = mean(Method::GpdSimple);
    let profile = mean(Method::GpdProfile);
    assert!(simple < 1.0 - alpha, "simple {simple}");
    assert!(profile >= simple, "profile {profile} < simple {simple}");
}
