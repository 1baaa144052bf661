use crate::error::{Error, Result};

/// Regression pairs `(y_{t-1}, y_t)` for the first-order autoregression.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    lag: Vec<f64>,
    response: Vec<f64>,
}

impl Design {
    pub fn new(lag: Vec<f64>, response: Vec<f64>) -> Result<Self> {
        if lag.len() != response.len() {
            return Err(Error::InvalidConfig(format!(
                "lag and response lengths differ ({} vs {})",
                lag.len(),
                response.len()
            )));
        }
        if lag.iter().chain(&response).any(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(
                "design contains non-finite values".into(),
            ));
        }
        Ok(Design { lag, response })
    }

    /// Pairs `(y_{t-1}, y_t)` for `t = 1..n` from a series `y_0, ..., y_n`.
    pub fn from_series(series: &[f64]) -> Result<Self> {
        if series.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: series.len(),
            });
        }
        Design::new(series[..series.len() - 1].to_vec(), series[1..].to_vec())
    }

    pub fn lag(&self) -> &[f64] {
        &self.lag
    }

    pub fn response(&self) -> &[f64] {
        &self.response
    }

    pub fn len(&self) -> usize {
        self.lag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lag.is_empty()
    }

    /// Resample rows by index.
    pub fn select(&self, rows: &[usize]) -> Design {
        Design {
            lag: rows.iter().map(|&i| self.lag[i]).collect(),
            response: rows.iter().map(|&i| self.response[i]).collect(),
        }
    }

    pub(crate) fn lag_mean(&self) -> f64 {
        self.lag.iter().sum::<f64>() / self.len() as f64
    }

    /// `sum (y_{t-1} - mean)^2`.
    pub fn lag_centered_ss(&self) -> f64 {
        let m = self.lag_mean();
        self.lag.iter().map(|x| (x - m) * (x - m)).sum()
    }

    /// `sum y_{t-1}^2`.
    pub fn lag_raw_ss(&self) -> f64 {
        self.lag.iter().map(|x| x * x).sum()
    }

    /// Lag-column sum of squares matching the fitted model: centered with an
    /// intercept, raw without.
    pub fn lag_ss(&self, include_intercept: bool) -> f64 {
        if include_intercept {
            self.lag_centered_ss()
        } else {
            self.lag_raw_ss()
        }
    }

    pub(crate) fn lag_is_constant(&self) -> bool {
        let first = self.lag[0];
        self.lag.iter().all(|&x| x == first)
    }

    pub(crate) fn lag_is_zero(&self) -> bool {
        self.lag.iter().all(|&x| x == 0.0)
    }

    pub(crate) fn check_regular(&self, include_intercept: bool) -> Result<()> {
        if self.is_empty() {
            return Err(Error::InsufficientData { needed: 1, got: 0 });
        }
        if include_intercept && self.lag_is_constant() {
            return Err(Error::SingularDesign("lag column is constant"));
        }
        if !include_intercept && self.lag_is_zero() {
            return Err(Error::SingularDesign("lag column is identically zero"));
        }
        Ok(())
    }
}
