use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use qarlab::dgp::{draw_innovations, DgpConfig, InnovationKind};
use qarlab::limits::{sample_ou_ratio, sample_ou_ratio_with, Estimator, LimitLaw};
use qarlab::montecarlo::{ks_statistic, moment_check, run_experiment, ExperimentSpec, Purpose};
use qarlab::rng::{derive_seed, rng_from_seed};

/// Demeaned unit-root regression statistic `N (rho_hat - 1)` from a Gaussian
/// random walk of `steps` steps; shares the ratio's c = 0 limit.
fn random_walk_statistic(steps: usize, seed: u64) -> f64 {
    let mut rng = rng_from_seed(seed);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let mut y = 0.0f64;
    let (mut s_lag, mut s_lag2, mut s_lag_dy) = (0.0, 0.0, 0.0);
    for _ in 0..steps {
        let dy = normal.sample(&mut rng);
        s_lag += y;
        s_lag2 += y * y;
        s_lag_dy += y * dy;
        y += dy;
    }
    let n = steps as f64;
    let mean = s_lag / n;
    let num = s_lag_dy - mean * y;
    let den = s_lag2 - n * mean * mean;
    n * num / den
}

#[test]
fn ou_ratio_matches_finer_independent_oracle() {
    let draws = 50_000;
    let law = sample_ou_ratio(0.0, 4096, draws, 2024).unwrap();
    let mut oracle: Vec<f64> = (0..draws as u64)
        .into_par_iter()
        .map(|d| random_walk_statistic(4 * 4096, derive_seed(77, d)))
        .collect();
    oracle.sort_by(f64::total_cmp);
    let d = ks_statistic(&oracle, &law).unwrap();
    assert!(d <= 0.02, "KS {d}");
}

#[test]
fn ou_median_stable_under_grid_refinement() {
    let (coarse, fine, draws) = (4096usize, 8192usize, 20_000);
    let sd = (1.0 / fine as f64).sqrt();
    let fine_law = sample_ou_ratio_with(0.0, fine, draws, 5, move |rng, buf| {
        let normal = Normal::new(0.0, sd).unwrap();
        buf.iter_mut().for_each(|v| *v = normal.sample(rng));
    })
    .unwrap();
    // same Brownian paths, summed pairwise onto the coarse grid
    let coarse_law = sample_ou_ratio_with(0.0, coarse, draws, 5, move |rng, buf| {
        let normal = Normal::new(0.0, sd).unwrap();
        buf.iter_mut()
            .for_each(|v| *v = normal.sample(rng) + normal.sample(rng));
    })
    .unwrap();
    let (LimitLaw::Empirical(c), LimitLaw::Empirical(f)) = (&coarse_law, &fine_law) else {
        panic!("expected empirical laws");
    };

    let mut rng = rng_from_seed(9);
    let values = c.values();
    let mut medians: Vec<f64> = (0..200)
        .map(|_| {
            let mut r: Vec<f64> = (0..values.len())
                .map(|_| values[rand::Rng::random_range(&mut rng, 0..values.len())])
                .collect();
            r.sort_by(f64::total_cmp);
            r[r.len() / 2]
        })
        .collect();
    medians.sort_by(f64::total_cmp);
    let (lo, hi) = (medians[1], medians[198]);
    assert!(
        (lo..=hi).contains(&f.median()),
        "fine median {} outside [{lo}, {hi}]",
        f.median()
    );
}

#[test]
fn ks_accepts_true_normal_sample() {
    let mut x = draw_innovations(InnovationKind::standard_normal(), 5000, 31).unwrap();
    x.sort_by(f64::total_cmp);
    let d = ks_statistic(&x, &LimitLaw::normal(0.0, 1.0).unwrap()).unwrap();
    assert!(d < 0.03, "{d}");
}

#[test]
fn interval_coverage_near_nominal() {
    let dgp = DgpConfig::new(2000, -1.0, 0.5, 404);
    for est in [Estimator::Quantile { tau: 0.5 }, Estimator::Ols] {
        let spec = ExperimentSpec::new(dgp, est, Purpose::Coverage, 2000).unwrap();
        let cov = run_experiment(&spec).unwrap().coverage.unwrap();
        assert!((0.92..=0.97).contains(&cov), "{est:?}: {cov}");
    }
}

#[test]
fn stationary_moments_and_drift() {
    let dgp = DgpConfig::new(10_000, -1.0, 0.5, 8);
    let spec = ExperimentSpec::new(dgp, Estimator::Ols, Purpose::MomentCheck, 200).unwrap();
    let r = moment_check(&spec).unwrap();
    let m = r.moments.unwrap();
    assert!(
        (r.sample_mean - 0.5).abs() / 0.5 < 0.10,
        "{}",
        r.sample_mean
    );
    assert!(m.drift_mean.unwrap().abs() < 0.05, "{:?}", m.drift_mean);
}

#[test]
fn limit_law_run_is_schedule_independent() {
    let dgp = DgpConfig::new(3000, 1.0, 0.7, 12);
    let run = |threads| {
        let spec = ExperimentSpec::new(dgp, Estimator::Ols, Purpose::LimitLaw, 400)
            .unwrap()
            .with_reference(LimitLaw::cauchy(0.0, 1.0).unwrap())
            .with_threads(threads);
        run_experiment(&spec).unwrap()
    };
    let (a, b) = (run(1), run(8));
    assert_eq!(a.stats, b.stats);
    assert_eq!(a.ks_distance, b.ks_distance);
}
