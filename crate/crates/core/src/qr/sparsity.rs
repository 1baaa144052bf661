//! Density at the tau-quantile from residuals.
//!
//! Siddiqui difference quotient on the empirical quantile function with the
//! Hall-Sheather bandwidth.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::error::{check_tau, Error, Result};

pub const MIN_RESIDUALS: usize = 30;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparsityEstimate {
    /// Estimated `f(F^{-1}(tau))`, always positive.
    pub value: f64,
    pub bandwidth: f64,
}

/// Linear-interpolation sample quantile on sorted data (Hyndman-Fan type 7).
pub fn sample_quantile(sorted: &[f64], p: f64) -> f64 {
    let m = sorted.len();
    if m == 1 {
        return sorted[0];
    }
    let h = (m - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(m - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Hall-Sheather bandwidth for `m` observations at level `tau` (alpha = 0.05),
/// shrunk if necessary so that `tau +- h` stays inside (0, 1).
pub fn hall_sheather_bandwidth(m: usize, tau: f64) -> f64 {
    let std = Normal::standard();
    let z_alpha = std.inverse_cdf(0.975);
    let z_tau = std.inverse_cdf(tau);
    let phi = std.pdf(z_tau);
    let h = (m as f64).powf(-1.0 / 3.0)
        * z_alpha.powf(2.0 / 3.0)
        * (1.5 * phi * phi / (2.0 * z_tau * z_tau + 1.0)).powf(1.0 / 3.0);
    h.min(0.999 * tau.min(1.0 - tau))
}

pub fn estimate_sparsity(residuals: &[f64], tau: f64) -> Result<SparsityEstimate> {
    check_tau(tau)?;
    let m = residuals.len();
    if m < MIN_RESIDUALS {
        return Err(Error::InsufficientData {
            needed: MIN_RESIDUALS,
            got: m,
        });
    }
    let mut sorted = residuals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let h = hall_sheather_bandwidth(m, tau);
    let spread = sample_quantile(&sorted, tau + h) - sample_quantile(&sorted, tau - h);
    let value = 2.0 * h / spread.max(f64::EPSILON);
    Ok(SparsityEstimate {
        value,
        bandwidth: h,
    })
}
