//! Simulated draws of the demeaned Ornstein-Uhlenbeck ratio
//!
//! ```text
//!     (int J dW - W(1) int J) / (int J^2 - (int J)^2),   dJ = c J dr + dW,
//! ```
//!
//! using Euler-Maruyama on a uniform grid and left-point (Ito) sums.

use rand_distr::{Distribution, Normal};
use rayon::prelude::*;

use super::law::{EmpiricalLaw, LimitLaw};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed, Rng};

pub const MIN_OU_GRID: usize = 1000;
pub const MIN_OU_DRAWS: usize = 1000;
const DEGENERATE: f64 = 1e-12;

/// Ratio functional from Brownian increments over `[0, 1]`, or `None` when the
/// denominator falls below `1e-12`.
pub fn ou_ratio(c: f64, increments: &[f64]) -> Option<f64> {
    let dt = 1.0 / increments.len() as f64;
    let (mut j, mut w) = (0.0f64, 0.0f64);
    let (mut int_j_dw, mut int_j, mut int_j2) = (0.0, 0.0, 0.0);
    for &dw in increments {
        int_j_dw += j * dw;
        int_j += j * dt;
        int_j2 += j * j * dt;
        j += c * j * dt + dw;
        w += dw;
    }
    let den = int_j2 - int_j * int_j;
    if den.is_nan() || den < DEGENERATE {
        return None;
    }
    Some((int_j_dw - w * int_j) / den)
}

/// Empirical law of the ratio from `draws` independent Brownian paths.
pub fn sample_ou_ratio(c: f64, grid_points: usize, draws: usize, seed: u64) -> Result<LimitLaw> {
    let sd = (1.0 / grid_points as f64).sqrt();
    sample_ou_ratio_with(c, grid_points, draws, seed, move |rng, buf| {
        let law = Normal::new(0.0, sd).expect("positive sd");
        for v in buf.iter_mut() {
            *v = law.sample(rng);
        }
    })
}

/// As [`sample_ou_ratio`], with a caller-supplied increment generator.
/// Degenerate draws are redrawn; more than 1% redraws is an error.
pub fn sample_ou_ratio_with<F>(
    c: f64,
    grid_points: usize,
    draws: usize,
    seed: u64,
    increments: F,
) -> Result<LimitLaw>
where
    F: Fn(&mut Rng, &mut [f64]) + Sync,
{
    if grid_points < MIN_OU_GRID || draws < MIN_OU_DRAWS {
        return Err(Error::InvalidConfig(format!(
            "need grid >= {MIN_OU_GRID} and draws >= {MIN_OU_DRAWS}, got {grid_points} and {draws}"
        )));
    }
    if !c.is_finite() {
        return Err(Error::InvalidConfig(format!("c must be finite, got {c}")));
    }
    let allowed = draws / 100;
    let results: Vec<std::result::Result<(f64, usize), usize>> = (0..draws)
        .into_par_iter()
        .map_init(
            || vec![0.0; grid_points],
            |buf, d| {
                let stream = derive_seed(seed, d as u64);
                let mut redraws = 0;
                loop {
                    let mut rng = rng_from_seed(derive_seed(stream, redraws as u64));
                    increments(&mut rng, buf);
                    if let Some(v) = ou_ratio(c, buf) {
                        return Ok((v, redraws));
                    }
                    redraws += 1;
                    if redraws > allowed {
                        return Err(redraws);
                    }
                }
            },
        )
        .collect();

    let mut values = Vec::with_capacity(draws);
    let mut redraws = 0;
    for r in results {
        match r {
            Ok((v, k)) => {
                values.push(v);
                redraws += k;
            }
            Err(k) => redraws += k,
        }
    }
    if redraws > allowed || values.len() < draws {
        return Err(Error::DiscretizationFailure { redraws, draws });
    }
    Ok(LimitLaw::Empirical(EmpiricalLaw::from_unsorted(values)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_increments_are_degenerate() {
        assert_eq!(ou_ratio(0.0, &[0.0; 2000]), None);
        let err = sample_ou_ratio_with(0.0, 1000, 1000, 1, |_, buf| buf.fill(0.0)).unwrap_err();
        assert!(matches!(err, Error::DiscretizationFailure { .. }), "{err}");
    }

    #[test]
    fn deterministic_in_seed() {
        let a = sample_ou_ratio(-2.0, 1000, 1000, 9).unwrap();
        let b = sample_ou_ratio(-2.0, 1000, 1000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn small_inputs_rejected() {
        assert!(sample_ou_ratio(0.0, 10, 1000, 1).is_err());
        assert!(sample_ou_ratio(0.0, 1000, 10, 1).is_err());
    }

    #[test]
    fn linear_path_closed_form() {
        // constant increments, c = 0: J(r) = W(r) = r
        let m = 100_000;
        let inc = vec![1.0 / m as f64; m];
        // int r dr - 1 * 1/2 = 0 in the limit, over 1/3 - 1/4
        let v = ou_ratio(0.0, &inc).unwrap();
        assert!(v.abs() < 1e-3, "{v}");
    }
}
