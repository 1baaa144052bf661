//! Autoregressions with a root moderately close to one.
//!
//! `y_t = mu + rho * y_{t-1} + eps_t`, `y_0 = 0`, with `rho = 1 + c / k_n` and
//! `k_n = n^gamma`. Negative `c` gives the near-stationary side, positive `c`
//! the mildly explosive side, `c = 0` a unit root.

use rand_distr::{Distribution, Normal, StudentT};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Largest admissible `c * n^(1 - gamma)` for `c > 0`. `rho^n` is roughly
/// `exp(c * n^(1 - gamma))` and doubles overflow near `exp(709)`.
pub const OVERFLOW_LIMIT: f64 = 300.0;

/// Innovation law. Both choices have mean zero and finite variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InnovationKind {
    Gaussian {
        sigma: f64,
    },
    /// `scale * T_df`; variance `scale^2 * df / (df - 2)`.
    StudentT {
        df: f64,
        scale: f64,
    },
}

impl InnovationKind {
    pub fn standard_normal() -> Self {
        InnovationKind::Gaussian { sigma: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InnovationKind::Gaussian { sigma } => {
                if !(sigma.is_finite() && sigma > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "gaussian sigma must be positive, got {sigma}"
                    )));
                }
            }
            InnovationKind::StudentT { df, scale } => {
                if !(df.is_finite() && df > 2.0) {
                    return Err(Error::InvalidConfig(format!(
                        "student-t needs df > 2 for a finite variance, got {df}"
                    )));
                }
                if !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::InvalidConfig(format!(
                        "student-t scale must be positive, got {scale}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn variance(&self) -> f64 {
        match *self {
            InnovationKind::Gaussian { sigma } => sigma * sigma,
            InnovationKind::StudentT { df, scale } => scale * scale * df / (df - 2.0),
        }
    }

    /// Standard deviation of the innovations.
    pub fn sigma(&self) -> f64 {
        self.variance().sqrt()
    }

    /// Quantile function `F^{-1}(tau)`.
    pub fn quantile(&self, tau: f64) -> f64 {
        match *self {
            InnovationKind::Gaussian { sigma } => statrs::distribution::Normal::new(0.0, sigma)
                .expect("validated sigma")
                .inverse_cdf(tau),
            InnovationKind::StudentT { df, scale } => {
                statrs::distribution::StudentsT::new(0.0, scale, df)
                    .expect("validated student-t")
                    .inverse_cdf(tau)
            }
        }
    }

    /// Density `f(x)`.
    pub fn density(&self, x: f64) -> f64 {
        match *self {
            InnovationKind::Gaussian { sigma } => statrs::distribution::Normal::new(0.0, sigma)
                .expect("validated sigma")
                .pdf(x),
            InnovationKind::StudentT { df, scale } => {
                statrs::distribution::StudentsT::new(0.0, scale, df)
                    .expect("validated student-t")
                    .pdf(x)
            }
        }
    }

    /// `f(F^{-1}(tau))`, the reciprocal of the sparsity at `tau`.
    pub fn density_at_quantile(&self, tau: f64) -> f64 {
        self.density(self.quantile(tau))
    }
}

/// Full description of one simulated series.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DgpConfig {
    pub n: usize,
    pub c: f64,
    pub gamma: f64,
    pub mu: f64,
    pub innovation: InnovationKind,
    pub seed: u64,
}

impl DgpConfig {
    /// Gaussian(sigma = 1) innovations, zero intercept.
    pub fn new(n: usize, c: f64, gamma: f64, seed: u64) -> Self {
        DgpConfig {
            n,
            c,
            gamma,
            mu: 0.0,
            innovation: InnovationKind::standard_normal(),
            seed,
        }
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_innovation(mut self, innovation: InnovationKind) -> Self {
        self.innovation = innovation;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "gamma must lie in (0, 1], got {}",
                self.gamma
            )));
        }
        if !self.c.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "c must be finite, got {}",
                self.c
            )));
        }
        if !self.mu.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "mu must be finite, got {}",
                self.mu
            )));
        }
        self.innovation.validate()?;
        if self.c > 0.0 {
            let exponent = self.c * (self.n as f64).powf(1.0 - self.gamma);
            if exponent > OVERFLOW_LIMIT {
                return Err(Error::ExplosiveOverflow {
                    exponent,
                    limit: OVERFLOW_LIMIT,
                });
            }
        }
        make_rho(self.c, self.gamma, self.n)?;
        Ok(())
    }

    /// `k_n = n^gamma`.
    pub fn k_n(&self) -> f64 {
        (self.n as f64).powf(self.gamma)
    }

    pub fn rho(&self) -> Result<f64> {
        make_rho(self.c, self.gamma, self.n)
    }

    /// `rho^n`, computed as `exp(n * ln(1 + c / k_n))`.
    pub fn rho_pow_n(&self) -> Result<f64> {
        let v = ((self.n as f64) * (self.c / self.k_n()).ln_1p()).exp();
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::ExplosiveOverflow {
                exponent: self.c * (self.n as f64).powf(1.0 - self.gamma),
                limit: OVERFLOW_LIMIT,
            })
        }
    }
}

/// `rho = 1 + c / n^gamma`.
pub fn make_rho(c: f64, gamma: f64, n: usize) -> Result<f64> {
    if n < 1 {
        return Err(Error::InvalidConfig("n must be >= 1".into()));
    }
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "gamma must lie in (0, 1], got {gamma}"
        )));
    }
    let rho = 1.0 + c / (n as f64).powf(gamma);
    if rho.is_finite() {
        Ok(rho)
    } else {
        Err(Error::InvalidConfig(format!(
            "rho = 1 + c/k_n is not finite for c = {c}"
        )))
    }
}

/// `n` iid innovations from `kind`, fully determined by `seed`.
pub fn draw_innovations(kind: InnovationKind, n: usize, seed: u64) -> Result<Vec<f64>> {
    kind.validate()?;
    if n < 1 {
        return Err(Error::InvalidConfig("need at least one innovation".into()));
    }
    let mut rng = rng_from_seed(seed);
    let draws = match kind {
        InnovationKind::Gaussian { sigma } => {
            let law = Normal::new(0.0, sigma).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            law.sample_iter(&mut rng).take(n).collect()
        }
        InnovationKind::StudentT { df, scale } => {
            let law = StudentT::new(df).map_err(|e| Error::InvalidConfig(e.to_string()))?;
            (0..n).map(|_| scale * law.sample(&mut rng)).collect()
        }
    };
    Ok(draws)
}

/// A simulated path `y_0 = 0, y_1, ..., y_n` with the innovations that drove it.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    values: Vec<f64>,
    innovations: Vec<f64>,
    config: DgpConfig,
    rho: f64,
}

impl Sample {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `eps_1, ..., eps_n`.
    pub fn innovations(&self) -> &[f64] {
        &self.innovations
    }

    pub fn config(&self) -> &DgpConfig {
        &self.config
    }

    /// The autoregressive root used by the recursion.
    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

impl AsRef<[f64]> for Sample {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

pub fn simulate(config: &DgpConfig) -> Result<Sample> {
    config.validate()?;
    let eps = draw_innovations(config.innovation, config.n, config.seed)?;
    simulate_with_innovations(config, eps)
}

/// Run the recursion on caller-supplied innovations (`eps.len()` must equal `n`).
pub fn simulate_with_innovations(config: &DgpConfig, eps: Vec<f64>) -> Result<Sample> {
    config.validate()?;
    if eps.len() != config.n {
        return Err(Error::InvalidConfig(format!(
            "expected {} innovations, got {}",
            config.n,
            eps.len()
        )));
    }
    let rho = config.rho()?;
    let mut values = Vec::with_capacity(config.n + 1);
    values.push(0.0);
    let mut prev = 0.0;
    for (i, e) in eps.iter().enumerate() {
        let y = config.mu + rho * prev + e;
        if !y.is_finite() {
            return Err(Error::NumericFailure { t: i + 1 });
        }
        values.push(y);
        prev = y;
    }
    Ok(Sample {
        values,
        innovations: eps,
        config: *config,
        rho,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn make_rho_examples() {
        assert_eq!(make_rho(0.0, 0.5, 100).unwrap(), 1.0);
        assert!((make_rho(-1.0, 0.5, 100).unwrap() - 0.9).abs() < 1e-15);
        assert!((make_rho(1.0, 1.0, 100).unwrap() - 1.01).abs() < 1e-15);
        assert!(make_rho(1.0, 0.0, 100).is_err());
        assert!(make_rho(1.0, 1.5, 100).is_err());
        assert!(make_rho(f64::INFINITY, 0.5, 100).is_err());
    }

    #[test]
    fn innovations_are_deterministic() {
        let kind = InnovationKind::Gaussian { sigma: 1.0 };
        let a = draw_innovations(kind, 1000, 7).unwrap();
        let b = draw_innovations(kind, 1000, 7).unwrap();
        assert_eq!(a, b);
        let c = draw_innovations(kind, 1000, 8).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn gaussian_variance_large_n() {
        let eps = draw_innovations(InnovationKind::Gaussian { sigma: 1.0 }, 1_000_000, 7).unwrap();
        let m = eps.len() as f64;
        let mean = eps.iter().sum::<f64>() / m;
        let var = eps.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (m - 1.0);
        assert!(mean.abs() < 0.01, "mean {mean}");
        assert!((var - 1.0).abs() < 0.01, "variance {var}");
    }

    #[test]
    fn student_t_variance_and_rejection() {
        let kind = InnovationKind::StudentT {
            df: 5.0,
            scale: 2.0,
        };
        assert!((kind.variance() - 4.0 * 5.0 / 3.0).abs() < 1e-12);
        let eps = draw_innovations(kind, 400_000, 3).unwrap();
        let var = eps.iter().map(|e| e * e).sum::<f64>() / eps.len() as f64;
        assert!((var / kind.variance() - 1.0).abs() < 0.05, "variance {var}");

        let bad = InnovationKind::StudentT {
            df: 2.0,
            scale: 1.0,
        };
        assert!(matches!(
            draw_innovations(bad, 10, 1),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn zero_forcing_gives_zero_path() {
        let cfg = DgpConfig::new(50, -1.0, 0.5, 0);
        let s = simulate_with_innovations(&cfg, vec![0.0; 50]).unwrap();
        assert!(s.values().iter().all(|&y| y == 0.0));
        assert_eq!(s.len(), 51);
    }

    #[test]
    fn direct_recursion() {
        let cfg = DgpConfig::new(100, -1.0, 0.5, 0);
        let mut eps = vec![0.0; 100];
        eps[0] = 1.0;
        let s = simulate_with_innovations(&cfg, eps).unwrap();
        let y = s.values();
        assert_eq!(y[0], 0.0);
        assert_eq!(y[1], 1.0);
        assert!((y[2] - 0.9).abs() < 1e-15);
        assert!((y[3] - 0.81).abs() < 1e-15);
    }

    #[test]
    fn overflow_guard() {
        let cfg = DgpConfig::new(100_000, 5.0, 0.2, 1);
        assert!(matches!(
            simulate(&cfg),
            Err(Error::ExplosiveOverflow { .. })
        ));
        // exactly on the boundary is allowed: c * n^(1-gamma) = 300 with gamma = 1
        let cfg = DgpConfig::new(10, 300.0, 1.0, 1);
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn invalid_configs() {
        assert!(DgpConfig::new(1, -1.0, 0.5, 0).validate().is_err());
        assert!(DgpConfig::new(10, -1.0, 0.0, 0).validate().is_err());
        assert!(DgpConfig::new(10, f64::NAN, 0.5, 0).validate().is_err());
        let bad = DgpConfig::new(10, -1.0, 0.5, 0)
            .with_innovation(InnovationKind::Gaussian { sigma: 0.0 });
        assert!(bad.validate().is_err());
    }

    #[test]
    fn simulate_is_pure() {
        let cfg = DgpConfig::new(500, 1.0, 0.7, 11).with_mu(0.3);
        assert_eq!(simulate(&cfg).unwrap(), simulate(&cfg).unwrap());
    }

    #[test]
    fn rho_pow_n_matches_powi() {
        let cfg = DgpConfig::new(4, 1.0, 0.5, 0);
        assert!((cfg.rho_pow_n().unwrap() - 5.0625).abs() < 1e-12);
    }

    #[test]
    fn quantile_and_density() {
        let g = InnovationKind::standard_normal();
        assert!(g.quantile(0.5).abs() < 1e-12);
        assert!((g.density_at_quantile(0.5) - 0.398_942_280_401_432_7).abs() < 1e-12);
        let t = InnovationKind::StudentT {
            df: 4.0,
            scale: 1.0,
        };
        assert!(t.quantile(0.5).abs() < 1e-8);
        // t_4 density at 0: Gamma(2.5) / (sqrt(4 pi) Gamma(2)) = 0.375
        assert!((t.density(0.0) - 0.375).abs() < 1e-12);
    }
}
