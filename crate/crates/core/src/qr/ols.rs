use super::design::Design;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    /// `None` when the model has no intercept.
    pub mu_hat: Option<f64>,
    pub rho_hat: f64,
    /// Residual variance `SSR / (n - p)`.
    pub sigma2_hat: f64,
    pub residuals: Vec<f64>,
}

impl OlsFit {
    pub fn include_intercept(&self) -> bool {
        self.mu_hat.is_some()
    }

    /// Analytic standard errors `(se(mu), se(rho))`.
    pub fn standard_errors(&self, design: &Design) -> (Option<f64>, f64) {
        let sigma = self.sigma2_hat.sqrt();
        let n = design.len() as f64;
        if self.include_intercept() {
            let sxx = design.lag_centered_ss();
            let m = design.lag_mean();
            (
                Some(sigma * (1.0 / n + m * m / sxx).sqrt()),
                sigma / sxx.sqrt(),
            )
        } else {
            (None, sigma / design.lag_raw_ss().sqrt())
        }
    }
}

/// Least squares on a series `y_0, ..., y_n`.
///
/// Without an intercept `rho_hat = sum y_t y_{t-1} / sum y_{t-1}^2`.
pub fn fit_ols(series: &[f64], include_intercept: bool) -> Result<OlsFit> {
    if series.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: series.len(),
        });
    }
    fit_ols_design(&Design::from_series(series)?, include_intercept)
}

pub fn fit_ols_design(design: &Design, include_intercept: bool) -> Result<OlsFit> {
    let n = design.len();
    let p = if include_intercept { 2 } else { 1 };
    if n <= p {
        return Err(Error::InsufficientData {
            needed: p + 1,
            got: n,
        });
    }
    let (x, y) = (design.lag(), design.response());
    let (mu, rho) = if include_intercept {
        let mx = design.lag_mean();
        let my = y.iter().sum::<f64>() / n as f64;
        let (sxx, sxy) = x.iter().zip(y).fold((0.0, 0.0), |(a, b), (xi, yi)| {
            (a + (xi - mx) * (xi - mx), b + (xi - mx) * (yi - my))
        });
        if sxx <= 0.0 {
            return Err(Error::SingularDesign("lag column is constant"));
        }
        let rho = sxy / sxx;
        (my - rho * mx, rho)
    } else {
        let (sxx, sxy) = x
            .iter()
            .zip(y)
            .fold((0.0, 0.0), |(a, b), (xi, yi)| (a + xi * xi, b + xi * yi));
        if sxx <= 0.0 {
            return Err(Error::SingularDesign("lag column is identically zero"));
        }
        (0.0, sxy / sxx)
    };
    let residuals: Vec<f64> = x.iter().zip(y).map(|(xi, yi)| yi - mu - rho * xi).collect();
    let ssr: f64 = residuals.iter().map(|u| u * u).sum();
    Ok(OlsFit {
        mu_hat: include_intercept.then_some(mu),
        rho_hat: rho,
        sigma2_hat: ssr / (n - p) as f64,
        residuals,
    })
}
