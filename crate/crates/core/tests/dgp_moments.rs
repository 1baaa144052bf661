use qarlab::dgp::{simulate, DgpConfig};
use qarlab::rng::derive_seed;
use rayon::prelude::*;

const SEEDS: u64 = 500;

fn per_seed<T: Send>(cfg: DgpConfig, f: impl Fn(&[f64]) -> T + Sync) -> Vec<T> {
    (0..SEEDS)
        .into_par_iter()
        .map(|s| {
            f(simulate(&cfg.with_seed(derive_seed(99, s)))
                .unwrap()
                .values())
        })
        .collect()
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    0.5 * (v[(v.len() - 1) / 2] + v[v.len() / 2])
}

#[test]
fn terminal_second_moment_scales_with_k() {
    for n in [1_000, 10_000, 100_000] {
        let cfg = DgpConfig::new(n, -1.0, 0.5, 0);
        let last: Vec<f64> = per_seed(cfg, |y| y[n] * y[n]);
        let ratio = last.iter().sum::<f64>() / last.len() as f64 / cfg.k_n();
        assert!((0.25..=1.0).contains(&ratio), "n={n}: {ratio}");
    }
}

#[test]
fn running_max_over_n_shrinks() {
    let mut prev = f64::INFINITY;
    for n in [1_000, 10_000, 100_000] {
        let cfg = DgpConfig::new(n, -1.0, 0.5, 0);
        let m = median(per_seed(cfg, |y| {
            y.iter().map(|v| v * v).fold(0.0, f64::max) / n as f64
        }));
        assert!(m < prev, "n={n}: median {m} not below {prev}");
        prev = m;
    }
}

#[test]
fn explosive_terminal_moment_is_bounded() {
    // y_n / (rho^n k_n) tends to a N(0, 1/(2c)) variable
    let mut prev = f64::INFINITY;
    for n in [1_000, 10_000, 100_000] {
        let cfg = DgpConfig::new(n, 1.0, 0.7, 0);
        let scale = cfg.rho_pow_n().unwrap() * cfg.k_n();
        let ratio = per_seed(cfg, |y| (y[n] / scale).powi(2))
            .iter()
            .sum::<f64>()
            / SEEDS as f64;
        assert!(ratio.is_finite() && ratio < 1.0, "n={n}: {ratio}");
        assert!(ratio <= 1.25 * prev, "n={n}: {ratio} grew from {prev}");
        prev = ratio;
    }
}
