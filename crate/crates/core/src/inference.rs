//! t-tests and confidence intervals for the autoregressive slope.
//!
//! Quantile version:
//! `t = sqrt(S_xx) * f_hat * (rho_hat(tau) - rho0) / sqrt(tau (1 - tau))`,
//! least squares: `t = sqrt(S_xx) * (rho_hat - rho0) / sigma_hat`, where
//! `S_xx` is the lag sum of squares (centred when the model has an intercept).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::qr::{Design, OlsFit, QuantileFit, SparsityEstimate};

pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TTestResult {
    pub statistic: f64,
    pub rho0: f64,
    /// Quantile level, 1 for least squares.
    pub tau: f64,
    pub critical_value: f64,
    pub reject: bool,
}

impl TTestResult {
    fn new(statistic: f64, rho0: f64, tau: f64, alpha: f64) -> Self {
        let critical_value = two_sided_critical(alpha);
        TTestResult {
            statistic,
            rho0,
            tau,
            critical_value,
            reject: statistic.abs() > critical_value,
        }
    }

    /// Same statistic, decided at another significance level.
    pub fn at_alpha(self, alpha: f64) -> Self {
        TTestResult::new(self.statistic, self.rho0, self.tau, alpha)
    }
}

/// `z_{1 - alpha/2}`.
pub fn two_sided_critical(alpha: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - alpha / 2.0)
}

fn lag_root_ss(series: &[f64], include_intercept: bool) -> Result<f64> {
    let ss = Design::from_series(series)?.lag_ss(include_intercept);
    if ss > 0.0 && ss.is_finite() {
        Ok(ss.sqrt())
    } else {
        Err(Error::SingularDesign("lag sum of squares is zero"))
    }
}

/// Standard error of `rho_hat(tau)`: `sqrt(tau (1 - tau)) / (f_hat sqrt(S_xx))`.
pub fn quantile_slope_se(
    series: &[f64],
    fit: &QuantileFit,
    sparsity: &SparsityEstimate,
) -> Result<f64> {
    let root = lag_root_ss(series, fit.include_intercept())?;
    Ok((fit.tau * (1.0 - fit.tau)).sqrt() / (sparsity.value * root))
}

/// Standard error of the least-squares slope: `sigma_hat / sqrt(S_xx)`.
pub fn ols_slope_se(series: &[f64], fit: &OlsFit) -> Result<f64> {
    let root = lag_root_ss(series, fit.include_intercept())?;
    Ok(fit.sigma2_hat.sqrt() / root)
}

pub fn t_stat_quantile(
    series: &[f64],
    fit: &QuantileFit,
    rho0: f64,
    sparsity: &SparsityEstimate,
) -> Result<TTestResult> {
    let se = quantile_slope_se(series, fit, sparsity)?;
    Ok(TTestResult::new(
        (fit.rho_hat - rho0) / se,
        rho0,
        fit.tau,
        DEFAULT_ALPHA,
    ))
}

pub fn t_stat_ols(series: &[f64], fit: &OlsFit, rho0: f64) -> Result<TTestResult> {
    let se = ols_slope_se(series, fit)?;
    Ok(TTestResult::new(
        (fit.rho_hat - rho0) / se,
        rho0,
        1.0,
        DEFAULT_ALPHA,
    ))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

fn symmetric_interval(estimate: f64, se: f64, level: f64) -> Result<Interval> {
    if !(level > 0.5 && level < 1.0) {
        return Err(Error::InvalidConfig(format!(
            "confidence level must lie in (0.5, 1), got {level}"
        )));
    }
    let half = two_sided_critical(1.0 - level) * se;
    Ok(Interval {
        lower: estimate - half,
        upper: estimate + half,
    })
}

pub fn confidence_interval_quantile(
    series: &[f64],
    fit: &QuantileFit,
    sparsity: &SparsityEstimate,
    level: f64,
) -> Result<Interval> {
    symmetric_interval(
        fit.rho_hat,
        quantile_slope_se(series, fit, sparsity)?,
        level,
    )
}

pub fn confidence_interval_ols(series: &[f64], fit: &OlsFit, level: f64) -> Result<Interval> {
    symmetric_interval(fit.rho_hat, ols_slope_se(series, fit)?, level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dgp::{simulate, DgpConfig};
    use crate::qr::{estimate_sparsity, fit_ols, fit_quantile, SolverMethod};

    fn quantile_fit(rho_hat: f64, tau: f64, intercept: bool) -> QuantileFit {
        QuantileFit {
            tau,
            mu_hat: intercept.then_some(0.0),
            rho_hat,
            objective: 0.0,
            residuals: vec![],
            solver_info: crate::qr::SolverInfo {
                method: SolverMethod::ExactEnumeration,
                iterations: 0,
                duality_gap: 0.0,
            },
        }
    }

    #[test]
    fn arithmetic_example() {
        // raw lag sum of squares 100: lags (10, 0, ...) with no intercept
        let series = [10.0, 0.0, 0.0];
        let sp = SparsityEstimate {
            value: 0.4,
            bandwidth: 0.1,
        };
        let t = t_stat_quantile(&series, &quantile_fit(0.55, 0.5, false), 0.5, &sp).unwrap();
        assert!((t.statistic - 0.4).abs() < 1e-12, "{}", t.statistic);
        assert!(!t.reject);
        assert!((t.critical_value - 1.959_963_985).abs() < 1e-8);

        let t0 = t_stat_quantile(&series, &quantile_fit(0.5, 0.5, false), 0.5, &sp).unwrap();
        assert_eq!(t0.statistic, 0.0);
        assert!(!t0.reject);
    }

    #[test]
    fn singular_lags() {
        let sp = SparsityEstimate {
            value: 0.4,
            bandwidth: 0.1,
        };
        assert!(matches!(
            t_stat_quantile(&[1.0, 1.0, 1.0], &quantile_fit(0.5, 0.5, true), 0.5, &sp),
            Err(Error::SingularDesign(_))
        ));
    }

    #[test]
    fn ols_sign_and_zero() {
        let s = simulate(&DgpConfig::new(300, -1.0, 0.5, 4)).unwrap();
        let fit = fit_ols(s.values(), true).unwrap();
        assert_eq!(
            t_stat_ols(s.values(), &fit, fit.rho_hat).unwrap().statistic,
            0.0
        );
        for rho0 in [0.5, 0.9, 0.95, 1.2] {
            let t = t_stat_ols(s.values(), &fit, rho0).unwrap();
            assert_eq!(t.statistic.signum(), (fit.rho_hat - rho0).signum());
            assert_eq!(t.reject, t.statistic.abs() > t.critical_value);
        }
    }

    #[test]
    fn ols_scale_invariance() {
        let s = simulate(&DgpConfig::new(400, -1.0, 0.5, 6)).unwrap();
        let scaled: Vec<f64> = s.values().iter().map(|v| 3.7 * v).collect();
        for intercept in [true, false] {
            let a = fit_ols(s.values(), intercept).unwrap();
            let b = fit_ols(&scaled, intercept).unwrap();
            let ta = t_stat_ols(s.values(), &a, 0.9).unwrap().statistic;
            let tb = t_stat_ols(&scaled, &b, 0.9).unwrap().statistic;
            assert!((ta - tb).abs() <= 1e-9 * ta.abs().max(1.0), "{ta} vs {tb}");
        }
    }

    #[test]
    fn quantile_stat_increasing_in_deviation() {
        let s = simulate(&DgpConfig::new(400, -1.0, 0.5, 6)).unwrap();
        let fit = fit_quantile(s.values(), 0.5, true, SolverMethod::InteriorPoint).unwrap();
        let sp = estimate_sparsity(&fit.residuals, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for rho0 in [0.5, 0.7, 0.9, 1.0, 1.1] {
            let t = t_stat_quantile(s.values(), &fit, rho0, &sp)
                .unwrap()
                .statistic;
            assert!(t < prev);
            prev = t;
        }
    }

    #[test]
    fn intervals_nest_and_centre() {
        let s = simulate(&DgpConfig::new(400, -1.0, 0.5, 6)).unwrap();
        let fit = fit_quantile(s.values(), 0.5, true, SolverMethod::InteriorPoint).unwrap();
        let sp = estimate_sparsity(&fit.residuals, 0.5).unwrap();
        let ci95 = confidence_interval_quantile(s.values(), &fit, &sp, 0.95).unwrap();
        assert!((ci95.midpoint() - fit.rho_hat).abs() < 1e-12);
        let ci90 = confidence_interval_quantile(s.values(), &fit, &sp, 0.90).unwrap();
        let ci99 = confidence_interval_quantile(s.values(), &fit, &sp, 0.99).unwrap();
        assert!(ci99.lower < ci90.lower && ci90.upper < ci99.upper);

        let ols = fit_ols(s.values(), true).unwrap();
        let o = confidence_interval_ols(s.values(), &ols, 0.95).unwrap();
        assert!((o.midpoint() - ols.rho_hat).abs() < 1e-12);
        assert!(confidence_interval_ols(s.values(), &ols, 0.4).is_err());
        assert!(confidence_interval_ols(s.values(), &ols, 1.0).is_err());
    }

    #[test]
    fn critical_value_by_alpha() {
        let t = TTestResult::new(2.0, 0.0, 0.5, 0.05);
        assert!(t.reject);
        assert!(!t.at_alpha(0.01).reject);
    }
}
