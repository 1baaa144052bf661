//! Check-loss regression of `y_t` on `(1, y_{t-1})` or on `y_{t-1}` alone.
//!
//! Two solvers share one result type. `InteriorPoint` is a primal-dual
//! Frisch-Newton method with Mehrotra predictor-corrector steps on the
//! bounded dual LP
//!
//! ```text
//!     max y'a   s.t.  X'a = (1 - tau) X'1,   0 <= a <= 1,
//! ```
//!
//! followed by a small vertex search around the smallest residuals so the
//! returned line interpolates `p` observations. `ExactEnumeration` evaluates
//! every basic solution (every pair of observations with an intercept, every
//! single observation without) and keeps the best; it is O(n^3) and meant as
//! a reference for moderate `n`.

use serde::{Deserialize, Serialize};

use super::check::{check_loss_unchecked, psi_unchecked};
use super::design::Design;
use crate::error::{check_tau, Error, Result};

const STEP_DAMPING: f64 = 0.99995;
const GAP_TOLERANCE: f64 = 1e-9;
const MAX_ITERATIONS: usize = 100;
const POLISH_CANDIDATES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    InteriorPoint,
    ExactEnumeration,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverInfo {
    pub method: SolverMethod,
    pub iterations: usize,
    /// Final complementarity gap of the interior point iterate, in units of
    /// the scaled problem; zero for enumeration.
    pub duality_gap: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantileFit {
    pub tau: f64,
    /// `None` when the model has no intercept.
    pub mu_hat: Option<f64>,
    pub rho_hat: f64,
    /// `sum rho_tau(residual_t)`.
    pub objective: f64,
    /// `u_t = y_t - mu_hat - rho_hat * y_{t-1}`.
    pub residuals: Vec<f64>,
    pub solver_info: SolverInfo,
}

impl QuantileFit {
    pub fn include_intercept(&self) -> bool {
        self.mu_hat.is_some()
    }
}

/// Fit on a series `y_0, ..., y_n`.
pub fn fit_quantile(
    series: &[f64],
    tau: f64,
    include_intercept: bool,
    method: SolverMethod,
) -> Result<QuantileFit> {
    if series.len() < 3 {
        return Err(Error::InsufficientData {
            needed: 3,
            got: series.len(),
        });
    }
    let design = Design::from_series(series)?;
    fit_quantile_design(&design, tau, include_intercept, method)
}

pub fn fit_quantile_design(
    design: &Design,
    tau: f64,
    include_intercept: bool,
    method: SolverMethod,
) -> Result<QuantileFit> {
    check_tau(tau)?;
    design.check_regular(include_intercept)?;
    let (mu, rho, info) = match method {
        SolverMethod::ExactEnumeration => {
            let (mu, rho) = enumerate_bases(design, tau, include_intercept)?;
            let info = SolverInfo {
                method,
                iterations: 0,
                duality_gap: 0.0,
            };
            (mu, rho, info)
        }
        SolverMethod::InteriorPoint => interior_point(design, tau, include_intercept)?,
    };
    Ok(build_fit(design, tau, include_intercept, mu, rho, info))
}

fn build_fit(
    design: &Design,
    tau: f64,
    include_intercept: bool,
    mu: f64,
    rho: f64,
    solver_info: SolverInfo,
) -> QuantileFit {
    let residuals: Vec<f64> = design
        .lag()
        .iter()
        .zip(design.response())
        .map(|(x, y)| y - mu - rho * x)
        .collect();
    let objective = residuals
        .iter()
        .map(|&u| check_loss_unchecked(u, tau))
        .sum();
    QuantileFit {
        tau,
        mu_hat: include_intercept.then_some(mu),
        rho_hat: rho,
        objective,
        residuals,
        solver_info,
    }
}

/// Check-loss objective of the line `mu + rho * x`.
pub fn objective(design: &Design, mu: f64, rho: f64, tau: f64) -> f64 {
    design
        .lag()
        .iter()
        .zip(design.response())
        .map(|(x, y)| check_loss_unchecked(y - mu - rho * x, tau))
        .sum()
}

/// Line through observations `i` and `j`, or `None` if their lags coincide.
fn line_through(design: &Design, i: usize, j: usize) -> Option<(f64, f64)> {
    let (x, y) = (design.lag(), design.response());
    let dx = x[j] - x[i];
    if dx == 0.0 {
        return None;
    }
    let rho = (y[j] - y[i]) / dx;
    Some((y[i] - rho * x[i], rho))
}

fn ray_through(design: &Design, i: usize) -> Option<(f64, f64)> {
    let x = design.lag()[i];
    if x == 0.0 {
        None
    } else {
        Some((0.0, design.response()[i] / x))
    }
}

/// Global minimiser by enumeration. Ties keep the lexicographically smallest
/// basis.
fn enumerate_bases(design: &Design, tau: f64, include_intercept: bool) -> Result<(f64, f64)> {
    let n = design.len();
    let mut best: Option<(f64, f64, f64)> = None;
    let mut consider = |cand: Option<(f64, f64)>| {
        if let Some((mu, rho)) = cand {
            let obj = objective(design, mu, rho, tau);
            if best.is_none_or(|(b, _, _)| obj < b) {
                best = Some((obj, mu, rho));
            }
        }
    };
    if include_intercept {
        for i in 0..n {
            for j in (i + 1)..n {
                consider(line_through(design, i, j));
            }
        }
    } else {
        for i in 0..n {
            consider(ray_through(design, i));
        }
    }
    best.map(|(_, mu, rho)| (mu, rho))
        .ok_or(Error::SingularDesign("no admissible basis"))
}

#[derive(Clone, Copy)]
struct Small {
    p: usize,
    m: [[f64; 2]; 2],
}

impl Small {
    fn zero(p: usize) -> Self {
        Small {
            p,
            m: [[0.0; 2]; 2],
        }
    }

    fn add_outer(&mut self, row: &[f64; 2], w: f64) {
        for a in 0..self.p {
            for b in 0..self.p {
                self.m[a][b] += w * row[a] * row[b];
            }
        }
    }

    fn solve(&self, rhs: [f64; 2]) -> Option<[f64; 2]> {
        if self.p == 1 {
            let d = self.m[0][0];
            return (d != 0.0 && d.is_finite()).then(|| [rhs[0] / d, 0.0]);
        }
        let det = self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        Some([
            (self.m[1][1] * rhs[0] - self.m[0][1] * rhs[1]) / det,
            (self.m[0][0] * rhs[1] - self.m[1][0] * rhs[0]) / det,
        ])
    }
}

/// Largest step in `[0, inf)` keeping `v + step * dv` nonnegative.
fn max_step(v: &[f64], dv: &[f64]) -> f64 {
    v.iter()
        .zip(dv)
        .filter(|(_, &d)| d < 0.0)
        .map(|(&v, &d)| -v / d)
        .fold(f64::INFINITY, f64::min)
}

fn scale_of(v: &[f64]) -> f64 {
    let m = v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    if m > 0.0 {
        m
    } else {
        1.0
    }
}

fn interior_point(
    design: &Design,
    tau: f64,
    include_intercept: bool,
) -> Result<(f64, f64, SolverInfo)> {
    let n = design.len();
    let p = if include_intercept { 2 } else { 1 };
    // centring the lag keeps the normal matrix well conditioned when the
    // series sits far from zero
    let xbar = if include_intercept {
        design.lag_mean()
    } else {
        0.0
    };
    let centred: Vec<f64> = design.lag().iter().map(|x| x - xbar).collect();
    let sx = scale_of(&centred);
    let sy = scale_of(design.response());
    let rows: Vec<[f64; 2]> = centred
        .iter()
        .map(|&x| {
            if include_intercept {
                [1.0, x / sx]
            } else {
                [x / sx, 0.0]
            }
        })
        .collect();
    let y: Vec<f64> = design.response().iter().map(|v| v / sy).collect();
    let dot = |r: &[f64; 2], b: &[f64; 2]| r[0] * b[0] + r[1] * b[1];

    // primal: a (named x) in [0, 1] with slack s = 1 - x; dual: beta, z, w
    // with X beta + z - w = -y. The regression coefficients are -beta.
    let mut x = vec![1.0 - tau; n];
    let mut s = vec![tau; n];
    let mut gram = Small::zero(p);
    let mut xty = [0.0; 2];
    for (r, yi) in rows.iter().zip(&y) {
        gram.add_outer(r, 1.0);
        xty[0] -= r[0] * yi;
        xty[1] -= r[1] * yi;
    }
    let mut beta = gram.solve(xty).ok_or(Error::SingularDesign(
        "lag column is collinear with the intercept",
    ))?;
    let resid: Vec<f64> = rows
        .iter()
        .zip(&y)
        .map(|(r, yi)| -yi - dot(r, &beta))
        .collect();
    let shift = 1e-3 * resid.iter().map(|v| v.abs()).sum::<f64>() / n as f64 + 1e-12;
    let mut z: Vec<f64> = resid.iter().map(|&v| v.max(0.0) + shift).collect();
    let mut w: Vec<f64> = resid.iter().map(|&v| (-v).max(0.0) + shift).collect();

    let mut q = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut ds = vec![0.0; n];
    let mut dz = vec![0.0; n];
    let mut dw = vec![0.0; n];
    let mut iterations = 0;
    let mut gap;
    // set when the Newton system breaks down or the iteration cap is hit
    let mut stalled = false;
    loop {
        gap = x.iter().zip(&z).map(|(a, b)| a * b).sum::<f64>()
            + s.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>();
        if !gap.is_finite() {
            return Err(Error::SolverFailure { iterations, gap });
        }
        let coef = [-beta[0], -beta[1]];
        let obj: f64 = rows
            .iter()
            .zip(&y)
            .map(|(r, yi)| check_loss_unchecked(yi - dot(r, &coef), tau))
            .sum();
        if gap <= GAP_TOLERANCE * (1.0 + obj) {
            break;
        }
        if iterations == MAX_ITERATIONS {
            stalled = true;
            break;
        }
        iterations += 1;

        // affine scaling direction
        let mut m = Small::zero(p);
        let mut rhs = [0.0; 2];
        for i in 0..n {
            q[i] = 1.0 / (z[i] / x[i] + w[i] / s[i]);
            m.add_outer(&rows[i], q[i]);
            let rv = z[i] - w[i];
            rhs[0] += q[i] * rv * rows[i][0];
            rhs[1] += q[i] * rv * rows[i][1];
        }
        let Some(mut dbeta) = m.solve(rhs) else {
            stalled = true;
            break;
        };
        for i in 0..n {
            dx[i] = q[i] * (dot(&rows[i], &dbeta) - (z[i] - w[i]));
            ds[i] = -dx[i];
            dz[i] = -z[i] * (1.0 + dx[i] / x[i]);
            dw[i] = -w[i] * (1.0 + ds[i] / s[i]);
        }
        let mut fp = (STEP_DAMPING * max_step(&x, &dx).min(max_step(&s, &ds))).min(1.0);
        let mut fd = (STEP_DAMPING * max_step(&z, &dz).min(max_step(&w, &dw))).min(1.0);

        if fp.min(fd) < 1.0 {
            // centering-corrector direction
            let g: f64 = (0..n)
                .map(|i| {
                    (z[i] + fd * dz[i]) * (x[i] + fp * dx[i])
                        + (w[i] + fd * dw[i]) * (s[i] + fp * ds[i])
                })
                .sum();
            let target = gap * (g / gap).powi(3) / (2.0 * n as f64);
            let mut rhs = [0.0; 2];
            let mut pv = vec![0.0; n];
            for i in 0..n {
                let dxdz = dx[i] * dz[i];
                let dsdw = ds[i] * dw[i];
                pv[i] =
                    target * (1.0 / x[i] - 1.0 / s[i]) - z[i] + w[i] - dxdz / x[i] + dsdw / s[i];
                rhs[0] -= q[i] * pv[i] * rows[i][0];
                rhs[1] -= q[i] * pv[i] * rows[i][1];
            }
            let Some(corrected) = m.solve(rhs) else {
                stalled = true;
                break;
            };
            dbeta = corrected;
            for i in 0..n {
                let dxdz = dx[i] * dz[i];
                let dsdw = ds[i] * dw[i];
                let ndx = q[i] * (dot(&rows[i], &dbeta) + pv[i]);
                let nds = -ndx;
                dz[i] = (target - x[i] * z[i] - dxdz - z[i] * ndx) / x[i];
                dw[i] = (target - s[i] * w[i] - dsdw - w[i] * nds) / s[i];
                dx[i] = ndx;
                ds[i] = nds;
            }
            fp = (STEP_DAMPING * max_step(&x, &dx).min(max_step(&s, &ds))).min(1.0);
            fd = (STEP_DAMPING * max_step(&z, &dz).min(max_step(&w, &dw))).min(1.0);
        }

        for i in 0..n {
            x[i] += fp * dx[i];
            s[i] += fp * ds[i];
            z[i] += fd * dz[i];
            w[i] += fd * dw[i];
        }
        beta[0] += fd * dbeta[0];
        beta[1] += fd * dbeta[1];
    }

    let (mu, rho) = if include_intercept {
        let rho = -beta[1] * sy / sx;
        (-beta[0] * sy - rho * xbar, rho)
    } else {
        (0.0, -beta[0] * sy / sx)
    };
    let (mu, rho) = polish(design, tau, include_intercept, mu, rho);
    // a stalled run is still usable if it ends on a provably optimal vertex
    if stalled && !is_optimal_vertex(design, tau, include_intercept, mu, rho) {
        return Err(Error::SolverFailure { iterations, gap });
    }
    let info = SolverInfo {
        method: SolverMethod::InteriorPoint,
        iterations,
        duality_gap: gap,
    };
    Ok((mu, rho, info))
}

/// Move an interior solution to a basic one: try the bases formed by the
/// observations with the smallest residuals and keep the best if it is no
/// worse than the interior point.
fn polish(design: &Design, tau: f64, include_intercept: bool, mu: f64, rho: f64) -> (f64, f64) {
    let n = design.len();
    let base_obj = objective(design, mu, rho, tau);
    let mut order: Vec<usize> = (0..n).collect();
    let abs_resid = |i: usize| (design.response()[i] - mu - rho * design.lag()[i]).abs();
    let k = POLISH_CANDIDATES.min(n);
    if k < n {
        order.select_nth_unstable_by(k - 1, |&a, &b| abs_resid(a).total_cmp(&abs_resid(b)));
    }
    let mut cand: Vec<usize> = order[..k].to_vec();
    cand.sort_unstable();

    let mut best: Option<(f64, f64, f64)> = None;
    let mut consider = |c: Option<(f64, f64)>| {
        if let Some((m, r)) = c {
            let obj = objective(design, m, r, tau);
            if best.is_none_or(|(b, _, _)| obj < b) {
                best = Some((obj, m, r));
            }
        }
    };
    if include_intercept {
        for a in 0..cand.len() {
            for b in (a + 1)..cand.len() {
                consider(line_through(design, cand[a], cand[b]));
            }
        }
    } else {
        for &i in &cand {
            consider(ray_through(design, i));
        }
    }
    match best {
        Some((obj, m, r)) if obj <= base_obj * (1.0 + 1e-12) => (m, r),
        _ => (mu, rho),
    }
}

/// Sufficient optimality check for a line through observations: the
/// observations it interpolates must be able to absorb the subgradient of the
/// others with weights in `[tau - 1, tau]`.
fn is_optimal_vertex(
    design: &Design,
    tau: f64,
    include_intercept: bool,
    mu: f64,
    rho: f64,
) -> bool {
    let (x, y) = (design.lag(), design.response());
    let tol = 1e-9 * (1.0 + scale_of(y));
    let slack = 1e-9 * design.len() as f64;
    let mut g = [0.0; 2];
    // interpolated observations grouped by lag: (lag, count)
    let mut groups: Vec<(f64, f64)> = Vec::new();
    for (&xi, &yi) in x.iter().zip(y) {
        let u = yi - mu - rho * xi;
        if u.abs() <= tol {
            match groups.iter_mut().find(|(l, _)| *l == xi) {
                Some(gr) => gr.1 += 1.0,
                None => groups.push((xi, 1.0)),
            }
        } else {
            let p = psi_unchecked(u, tau);
            g[0] += p;
            g[1] += p * xi;
        }
    }
    let within = |a: f64, count: f64| a >= count * (tau - 1.0) - slack && a <= count * tau + slack;
    if include_intercept {
        // need exactly two distinct lags: A1 + A2 = -g0, A1 x1 + A2 x2 = -g1
        let [(x1, c1), (x2, c2)] = groups[..] else {
            return false;
        };
        let a2 = (-g[1] + g[0] * x1) / (x2 - x1);
        let a1 = -g[0] - a2;
        within(a1, c1) && within(a2, c2)
    } else {
        // sum a_i x_i = -g1 with each a_i in [tau - 1, tau]
        let (lo, hi) = groups.iter().fold((0.0, 0.0), |(lo, hi), &(l, c)| {
            let (a, b) = (c * (tau - 1.0) * l, c * tau * l);
            (lo + a.min(b), hi + a.max(b))
        });
        let target = -g[1];
        !groups.is_empty() && target >= lo - slack && target <= hi + slack
    }
}

/// Subgradient sums `(sum psi(u_t), sum psi(u_t) y_{t-1})` at a fit.
pub fn subgradient_sums(design: &Design, fit: &QuantileFit) -> (f64, f64) {
    fit.residuals
        .iter()
        .zip(design.lag())
        .fold((0.0, 0.0), |(a, b), (&u, &x)| {
            let p = psi_unchecked(u, fit.tau);
            (a + p, b + p * x)
        })
}
