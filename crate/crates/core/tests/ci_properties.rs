use extreme_conformal::dist::student_t_quantile;
use extreme_conformal::quantile_ci::{
    ci_bootstrap_upper, ci_delta_upper, ci_profile_upper, delta_upper_from_information,
    ProfileLikelihood,
};
use extreme_conformal::{CiRequest, CiResult, CiStatus, ScoreSample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

type Method = fn(&CiRequest) -> CiResult;

fn t_scores(seed: u64, n: usize, nu: f64) -> ScoreSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = (0..n)
        .map(|_| student_t_quantile(rng.random_range(1e-12..1.0), nu))
        .collect();
    ScoreSample::new(v).unwrap()
}

fn request(sample: &ScoreSample, ci_level: f64) -> CiRequest<'_> {
    CiRequest {
        sample,
        tau0: 0.95,
        quantile_level: 1.0 - 5e-4,
        ci_level,
        bootstrap_reps: 300,
        seed: 17,
    }
}

#[test]
fn endpoints_nondecreasing_in_confidence() {
    let levels = [0.5, 0.8, 0.9, 0.99, 0.999];
    for seed in 0..4 {
        let sample = t_scores(seed, 1000, 4.0);
        let methods: [(&str, Method); 3] = [
            ("profile", |r| ci_profile_upper(r).unwrap()),
            ("bootstrap", |r| ci_bootstrap_upper(r).unwrap()),
            ("delta", |r| ci_delta_upper(r).unwrap()),
        ];
        for (name, method) in methods {
            let uppers: Vec<f64> = levels
                .iter()
                .map(|&c| method(&request(&sample, c)).upper_endpoint)
                .collect();
            for w in uppers.windows(2) {
                assert!(w[1] >= w[0], "{name}, seed {seed}: {uppers:?}");
            }
            for &c in &levels {
                let r = method(&request(&sample, c));
                if r.status == CiStatus::Ok {
                    assert!(r.upper_endpoint >= r.point_estimate, "{name}: {r:?}");
                }
            }
        }
    }
}

#[test]
fn profile_deviance_vanishes_at_estimate() {
    for seed in 10..15 {
        let sample = t_scores(seed, 1000, 3.5);
        let p = ProfileLikelihood::new(&sample, 0.95, 0.9999).unwrap();
        assert!(
            p.deviance(p.point_estimate()).abs() < 1e-8,
            "{}",
            p.deviance(p.point_estimate())
        );
        assert!(p.deviance(p.point_estimate() * 1.5 + 1.0) > 0.0);
    }
}

#[test]
fn singular_information_is_unstable() {
    let (u, s) = delta_upper_from_information(1.0, [1.0, 2.0], [[2.0, 2.0], [2.0, 2.0]], 0.95);
    assert_eq!(s, CiStatus::DeltaUnstable);
    assert_eq!(u, f64::INFINITY);
    let (_, s) = delta_upper_from_information(1.0, [1.0, 2.0], [[1.0, 0.0], [0.0, 1e-13]], 0.95);
    assert_eq!(s, CiStatus::DeltaUnstable);
}

#[test]
fn profile_is_more_conservative_than_bootstrap_on_average() {
    let reps = 500u64;
    let pairs: Vec<(f64, f64)> = (0..reps)
        .into_par_iter()
        .map(|r| {
            let sample = t_scores(1000 + r, 1000, 4.0);
            let mut req = request(&sample, 1.0 - 5e-4);
            req.bootstrap_reps = 200;
            req.seed = r;
            let p = ci_profile_upper(&req).unwrap();
            let b = ci_bootstrap_upper(&req).unwrap();
            (p.upper_endpoint, b.upper_endpoint)
        })
        .collect();
    let finite: Vec<_> = pairs.iter().filter(|(p, _)| p.is_finite()).collect();
    assert!(
        finite.len() as f64 >= 0.9 * reps as f64,
        "{} finite profile endpoints",
        finite.len()
    );
    let mean =
        |f: fn(&(f64, f64)) -> f64| finite.iter().map(|x| f(x)).sum::<f64>() / finite.len() as f64;
    let (mp, mb) = (mean(|x| x.0), mean(|x| x.1));
    assert!(mp >= mb, "profile mean {mp} < bootstrap mean {mb}");
}

#[test]
fn bootstrap_is_seed_deterministic() {
    let sample = t_scores(3, 1000, 4.0);
    let a = ci_bootstrap_upper(&request(&sample, 0.99)).unwrap();
    let b = ci_bootstrap_upper(&request(&sample, 0.99)).unwrap();
    assert_eq!(a, b);
    let mut other = request(&sample, 0.99);
    other.seed = 18;
    assert_ne!(
        ci_bootstrap_upper(&other).unwrap().upper_endpoint,
        a.upper_endpoint
    );
}
