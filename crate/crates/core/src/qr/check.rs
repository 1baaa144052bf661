//! The check function and its subgradient.

use crate::error::{check_tau, Result};

/// `rho_tau(u) = u * (tau - 1{u < 0})`.
pub fn check_loss(u: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(check_loss_unchecked(u, tau))
}

/// `psi_tau(u) = tau - 1{u <= 0}`. The indicator is closed at zero.
pub fn psi(u: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    Ok(psi_unchecked(u, tau))
}

#[inline]
pub(crate) fn check_loss_unchecked(u: f64, tau: f64) -> f64 {
    if u < 0.0 {
        u * (tau - 1.0)
    } else {
        u * tau
    }
}

#[inline]
pub(crate) fn psi_unchecked(u: f64, tau: f64) -> f64 {
    if u <= 0.0 {
        tau - 1.0
    } else {
        tau
    }
}

/// `int_0^1 1{u1 <= u2 * s} ds` in closed form.
fn indicator_integral(u1: f64, u2: f64) -> f64 {
    if u2 > 0.0 {
        (1.0 - u1 / u2).clamp(0.0, 1.0)
    } else if u2 < 0.0 {
        (u1 / u2).clamp(0.0, 1.0)
    } else if u1 <= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Left minus right side of Knight's identity
///
/// `rho(u1 - u2) - rho(u1) = -u2 psi(u1) + u2 int_0^1 [1{u1 <= u2 s} - 1{u1 <= 0}] ds`.
///
/// Zero up to rounding for every input.
pub fn knight_gap(u1: f64, u2: f64, tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let lhs = check_loss_unchecked(u1 - u2, tau) - check_loss_unchecked(u1, tau);
    let at_zero = if u1 <= 0.0 { 1.0 } else { 0.0 };
    let rhs = -u2 * psi_unchecked(u1, tau) + u2 * (indicator_integral(u1, u2) - at_zero);
    Ok(lhs - rhs)
}
