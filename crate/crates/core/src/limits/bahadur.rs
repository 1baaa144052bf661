use crate::dgp::Sample;
use crate::error::{check_tau, Error, Result};
use crate::qr::{fit_quantile, psi_unchecked, SolverMethod};

use super::{Regime, RegimeNormalization};

/// Max-norm distance between the normalised quantile estimate
/// `D_n (theta_hat(tau) - theta(tau))` and its linear approximation
/// `B^{-1} / f * sum psi_tau(eps_t - F^{-1}(tau)) D_n^{-1} (1, y_{t-1})'`
/// built from the true innovations. Near-stationary side only.
///
/// `B` is diagonal, which presumes `(1/(n sqrt(k_n))) sum y_{t-1} -> 0`; that
/// holds for `mu = 0`. A nonzero intercept puts the lag mean at
/// `mu / (1 - rho)` and the gap no longer vanishes.
pub fn bahadur_gap(sample: &Sample, tau: f64, f: f64) -> Result<f64> {
    check_tau(tau)?;
    if !(f > 0.0 && f.is_finite()) {
        return Err(Error::InvalidConfig(format!(
            "density must be positive, got {f}"
        )));
    }
    let cfg = sample.config();
    let norm = RegimeNormalization::new(Regime::NearStationary, cfg)?;
    let b_rho = norm.b_rho.expect("near-stationary B entry");

    let fit = fit_quantile(sample.values(), tau, true, SolverMethod::InteriorPoint)?;
    let q = cfg.innovation.quantile(tau);
    let mu_tau = cfg.mu + q;
    let rho = sample.rho();
    let lhs = [
        norm.d_mu * (fit.mu_hat.expect("intercept fit") - mu_tau),
        norm.d_rho * (fit.rho_hat - rho),
    ];

    let y = sample.values();
    let (s0, s1) = sample.innovations().iter().zip(&y[..y.len() - 1]).fold(
        (0.0, 0.0),
        |(a, b), (&e, &lag)| {
            let p = psi_unchecked(e - q, tau);
            (a + p, b + p * lag)
        },
    );
    let rhs = [s0 / (norm.d_mu * f), s1 / (norm.d_rho * b_rho * f)];
    Ok((lhs[0] - rhs[0]).abs().max((lhs[1] - rhs[1]).abs()))
}
