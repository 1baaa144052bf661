//! Pairs ("xy") bootstrap for quantile autoregression coefficients.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::Design;
use super::solver::{fit_quantile_design, SolverMethod};
use crate::error::{check_tau, Error, Result};
use crate::rng::{derive_seed, rng_from_seed};

pub const MIN_REPLICATES: usize = 50;
pub const DEFAULT_REPLICATES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapSe {
    /// `None` when the model has no intercept.
    pub se_mu: Option<f64>,
    pub se_rho: f64,
    pub replicates: usize,
    /// Resamples discarded for a singular design.
    pub redraws: usize,
}

/// Resample `(y_{t-1}, y_t)` pairs with replacement `replicates` times, refit
/// at `tau` and report the standard deviation of each coefficient.
///
/// Resample `b` draws from `derive_seed(derive_seed(seed, b), attempt)`, so the
/// result does not depend on thread scheduling.
pub fn bootstrap_xy(
    series: &[f64],
    tau: f64,
    include_intercept: bool,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapSe> {
    bootstrap_xy_design(
        &Design::from_series(series)?,
        tau,
        include_intercept,
        replicates,
        seed,
    )
}

pub fn bootstrap_xy_design(
    design: &Design,
    tau: f64,
    include_intercept: bool,
    replicates: usize,
    seed: u64,
) -> Result<BootstrapSe> {
    check_tau(tau)?;
    if replicates < MIN_REPLICATES {
        return Err(Error::InvalidConfig(format!(
            "bootstrap needs at least {MIN_REPLICATES} replicates, got {replicates}"
        )));
    }
    design.check_regular(include_intercept)?;
    let n = design.len();
    let budget = 10 * replicates;

    let draws: Vec<Result<((f64, f64), usize)>> = (0..replicates)
        .into_par_iter()
        .map(|b| {
            let stream = derive_seed(seed, b as u64);
            let mut failures = 0;
            loop {
                let mut rng = rng_from_seed(derive_seed(stream, failures as u64));
                let rows: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();
                match fit_quantile_design(
                    &design.select(&rows),
                    tau,
                    include_intercept,
                    SolverMethod::InteriorPoint,
                ) {
                    Ok(fit) => return Ok(((fit.mu_hat.unwrap_or(0.0), fit.rho_hat), failures)),
                    Err(Error::SingularDesign(_)) => {
                        failures += 1;
                        if failures >= budget {
                            return Err(Error::BootstrapFailure { failures, budget });
                        }
                    }
                    Err(e) => return Err(e),
                }
            }
        })
        .collect();

    let mut mus = Vec::with_capacity(replicates);
    let mut rhos = Vec::with_capacity(replicates);
    let mut redraws = 0;
    for d in draws {
        let ((m, r), f) = d?;
        mus.push(m);
        rhos.push(r);
        redraws += f;
    }
    if replicates + redraws > budget {
        return Err(Error::BootstrapFailure {
            failures: redraws,
            budget,
        });
    }
    Ok(BootstrapSe {
        se_mu: include_intercept.then(|| std_dev(&mus)),
        se_rho: std_dev(&rhos),
        replicates,
        redraws,
    })
}

fn std_dev(v: &[f64]) -> f64 {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series() -> Vec<f64> {
        let mut y = vec![0.0];
        for t in 1..200 {
            let e = ((t * 7919 % 101) as f64 / 101.0) - 0.5;
            y.push(0.6 * y[t - 1] + e);
        }
        y
    }

    #[test]
    fn deterministic_in_seed() {
        let y = series();
        let a = bootstrap_xy(&y, 0.5, true, 60, 42).unwrap();
        let b = bootstrap_xy(&y, 0.5, true, 60, 42).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_xy(&y, 0.5, true, 60, 43).unwrap();
        assert_ne!(a.se_rho, c.se_rho);
        assert!(a.se_rho > 0.0 && a.se_mu.unwrap() > 0.0);
    }

    #[test]
    fn too_few_replicates() {
        assert!(matches!(
            bootstrap_xy(&series(), 0.5, true, 10, 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn singular_resamples_are_redrawn() {
        // only two distinct lags: many resamples of a short series are constant
        let y = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let se = bootstrap_xy(&y, 0.5, true, 50, 5).unwrap();
        assert!(se.redraws > 0);
    }
}
