//! Normalisations and reference limit laws for the slope estimator.
//!
//! | regime           | side        | statistic                                  | limit                              |
//! |------------------|-------------|--------------------------------------------|------------------------------------|
//! | `NearStationary` | `c < 0`     | `sqrt(n k_n) (rho_hat - rho)`              | normal                             |
//! | `NearExplosive`  | `c > 0`     | `k_n rho^n / (2c) (rho_hat - rho)`         | Cauchy                             |
//! | `UnitGamma1`     | `gamma = 1` | `n (rho_hat - rho)`                        | OU ratio functional (simulated)    |
//!
//! For the quantile estimator on the explosive side the statistic is further
//! multiplied by the density `f(F^{-1}(tau))`.

mod bahadur;
mod law;
mod ou;

pub use bahadur::bahadur_gap;
pub use law::{EmpiricalLaw, LimitLaw, MIN_EMPIRICAL_LEN};
pub use ou::{ou_ratio, sample_ou_ratio, sample_ou_ratio_with, MIN_OU_DRAWS, MIN_OU_GRID};

use serde::{Deserialize, Serialize};

use crate::dgp::{DgpConfig, OVERFLOW_LIMIT};
use crate::error::{check_tau, Error, Result};

/// Slope estimator under study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "estimator", rename_all = "snake_case")]
pub enum Estimator {
    Ols,
    Quantile { tau: f64 },
}

impl Estimator {
    /// Quantile level; least squares reports 1 by convention.
    pub fn tau(&self) -> f64 {
        match self {
            Estimator::Ols => 1.0,
            Estimator::Quantile { tau } => *tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    NearStationary,
    NearExplosive,
    UnitGamma1,
}

impl Regime {
    /// The regime implied by the sign of `c` (and `gamma = 1` for the
    /// local-to-unity case).
    pub fn for_config(config: &DgpConfig) -> Result<Regime> {
        if config.gamma == 1.0 && config.c <= 0.0 {
            Ok(Regime::UnitGamma1)
        } else if config.c < 0.0 {
            Ok(Regime::NearStationary)
        } else if config.c > 0.0 {
            Ok(Regime::NearExplosive)
        } else {
            Err(Error::RegimeMismatch(format!(
                "c = 0 with gamma = {} has no moderate-deviation normalisation",
                config.gamma
            )))
        }
    }
}

/// Diagonal normalisation `D_n = diag(d_mu, d_rho)` and the slope entry of `B`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeNormalization {
    pub regime: Regime,
    pub d_mu: f64,
    pub d_rho: f64,
    /// `sigma^2 / (-2c)` on the near-stationary side. On the explosive side
    /// the entry is random and there is no deterministic value.
    pub b_rho: Option<f64>,
}

impl RegimeNormalization {
    pub fn new(regime: Regime, config: &DgpConfig) -> Result<Self> {
        config.validate()?;
        let n = config.n as f64;
        let k = config.k_n();
        match regime {
            Regime::NearStationary => {
                if config.c >= 0.0 {
                    return Err(Error::RegimeMismatch(format!(
                        "near-stationary normalisation needs c < 0, got {}",
                        config.c
                    )));
                }
                Ok(RegimeNormalization {
                    regime,
                    d_mu: n.sqrt(),
                    d_rho: (n * k).sqrt(),
                    b_rho: Some(config.innovation.variance() / (-2.0 * config.c)),
                })
            }
            Regime::NearExplosive => {
                if config.c <= 0.0 {
                    return Err(Error::RegimeMismatch(format!(
                        "near-explosive normalisation needs c > 0, got {}",
                        config.c
                    )));
                }
                let rho_n = config.rho_pow_n()?;
                let d_rho = rho_n * k;
                if !d_rho.is_finite() {
                    return Err(Error::ExplosiveOverflow {
                        exponent: config.c * n.powf(1.0 - config.gamma),
                        limit: OVERFLOW_LIMIT,
                    });
                }
                Ok(RegimeNormalization {
                    regime,
                    d_mu: n.sqrt(),
                    d_rho,
                    b_rho: None,
                })
            }
            Regime::UnitGamma1 => {
                if config.gamma != 1.0 {
                    return Err(Error::RegimeMismatch(format!(
                        "local-to-unity normalisation needs gamma = 1, got {}",
                        config.gamma
                    )));
                }
                Ok(RegimeNormalization {
                    regime,
                    d_mu: n.sqrt(),
                    d_rho: n,
                    b_rho: None,
                })
            }
        }
    }

    pub fn for_config(config: &DgpConfig) -> Result<Self> {
        RegimeNormalization::new(Regime::for_config(config)?, config)
    }

    /// Multiplier applied to `rho_hat - rho`.
    pub fn slope_scale(&self, c: f64) -> f64 {
        match self.regime {
            Regime::NearExplosive => self.d_rho / (2.0 * c),
            _ => self.d_rho,
        }
    }
}

/// Centred and scaled slope estimate.
pub fn normalize_stat(
    rho_hat: f64,
    config: &DgpConfig,
    normalization: &RegimeNormalization,
) -> Result<f64> {
    let fresh = RegimeNormalization::new(normalization.regime, config)?;
    let rho = config.rho()?;
    Ok(fresh.slope_scale(config.c) * (rho_hat - rho))
}

/// Normal limit on the near-stationary side: variance `-2c` for least
/// squares, `(-2c / sigma^2) tau (1 - tau) / f^2` for the quantile estimator.
pub fn reference_law_near_stationary(
    estimator: Estimator,
    c: f64,
    sigma: f64,
    f: f64,
) -> Result<LimitLaw> {
    if c.is_nan() || c >= 0.0 {
        return Err(Error::RegimeMismatch(format!(
            "near-stationary limit needs c < 0, got {c}"
        )));
    }
    match estimator {
        Estimator::Ols => LimitLaw::normal(0.0, -2.0 * c),
        Estimator::Quantile { tau } => {
            check_tau(tau)?;
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "density must be positive, got {f}"
                )));
            }
            if !(sigma > 0.0 && sigma.is_finite()) {
                return Err(Error::InvalidConfig(format!(
                    "sigma must be positive, got {sigma}"
                )));
            }
            LimitLaw::normal(
                0.0,
                (-2.0 * c / (sigma * sigma)) * tau * (1.0 - tau) / (f * f),
            )
        }
    }
}

/// Cauchy limit on the explosive side: `Cauchy(0, 1)` for least squares and
/// `Cauchy(0, sqrt(tau (1 - tau)) / sigma)` for `f / (2c) k_n rho^n (rho_hat - rho)`.
pub fn reference_law_near_explosive(estimator: Estimator, sigma: f64) -> Result<LimitLaw> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    match estimator {
        Estimator::Ols => LimitLaw::cauchy(0.0, 1.0),
        Estimator::Quantile { tau } => {
            check_tau(tau)?;
            LimitLaw::cauchy(0.0, (tau * (1.0 - tau)).sqrt() / sigma)
        }
    }
}
