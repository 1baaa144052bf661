use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const MIN_EMPIRICAL_LEN: usize = 1000;

/// Reference limiting distribution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum LimitLaw {
    Normal { mean: f64, variance: f64 },
    Cauchy { location: f64, scale: f64 },
    Empirical(EmpiricalLaw),
}

/// Distribution of a sorted sample. The CDF passes through `(i - 0.5) / m`
/// at the `i`-th order statistic and interpolates linearly in between.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalLaw {
    sorted: Vec<f64>,
}

impl EmpiricalLaw {
    pub fn new(sorted: Vec<f64>) -> Result<Self> {
        if sorted.len() < MIN_EMPIRICAL_LEN {
            return Err(Error::InsufficientData {
                needed: MIN_EMPIRICAL_LEN,
                got: sorted.len(),
            });
        }
        if sorted.iter().any(|v| !v.is_finite()) || sorted.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Unsorted);
        }
        Ok(EmpiricalLaw { sorted })
    }

    /// Sort `values` and wrap them.
    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(f64::total_cmp);
        EmpiricalLaw::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn median(&self) -> f64 {
        self.quantile(0.5)
    }

    fn position(&self, i: usize) -> f64 {
        (i as f64 + 0.5) / self.sorted.len() as f64
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let s = &self.sorted;
        let m = s.len();
        if x < s[0] {
            return 0.0;
        }
        if x > s[m - 1] {
            return 1.0;
        }
        // first index with s[i] > x
        let hi = s.partition_point(|&v| v <= x);
        if hi == 0 {
            return self.position(0);
        }
        let lo = hi - 1;
        if hi == m || s[hi] == s[lo] {
            return self.position(lo);
        }
        let frac = (x - s[lo]) / (s[hi] - s[lo]);
        self.position(lo) + frac / m as f64
    }

    pub fn quantile(&self, p: f64) -> f64 {
        let s = &self.sorted;
        let m = s.len();
        let h = p * m as f64 - 0.5;
        if h <= 0.0 {
            return s[0];
        }
        if h >= (m - 1) as f64 {
            return s[m - 1];
        }
        let lo = h.floor() as usize;
        s[lo] + (h - lo as f64) * (s[lo + 1] - s[lo])
    }
}

impl LimitLaw {
    pub fn normal(mean: f64, variance: f64) -> Result<Self> {
        if !(variance.is_finite() && variance > 0.0 && mean.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "normal law needs a positive finite variance, got {variance}"
            )));
        }
        Ok(LimitLaw::Normal { mean, variance })
    }

    pub fn cauchy(location: f64, scale: f64) -> Result<Self> {
        if !(scale.is_finite() && scale > 0.0 && location.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "cauchy law needs a positive finite scale, got {scale}"
            )));
        }
        Ok(LimitLaw::Cauchy { location, scale })
    }

    pub fn is_cauchy(&self) -> bool {
        matches!(self, LimitLaw::Cauchy { .. })
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            LimitLaw::Normal { mean, variance } => Normal::new(*mean, variance.sqrt())
                .expect("validated")
                .cdf(x),
            LimitLaw::Cauchy { location, scale } => {
                0.5 + ((x - location) / scale).atan() / std::f64::consts::PI
            }
            LimitLaw::Empirical(e) => e.cdf(x),
        }
    }

    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            LimitLaw::Normal { mean, variance } => Normal::new(*mean, variance.sqrt())
                .expect("validated")
                .inverse_cdf(p),
            LimitLaw::Cauchy { location, scale } => {
                location + scale * (std::f64::consts::PI * (p - 0.5)).tan()
            }
            LimitLaw::Empirical(e) => e.quantile(p),
        }
    }

    /// Variance where it exists.
    pub fn variance(&self) -> Option<f64> {
        match self {
            LimitLaw::Normal { variance, .. } => Some(*variance),
            LimitLaw::Cauchy { .. } => None,
            LimitLaw::Empirical(e) => {
                let v = e.values();
                let m = v.len() as f64;
                let mean = v.iter().sum::<f64>() / m;
                Some(v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (m - 1.0))
            }
        }
    }
}
