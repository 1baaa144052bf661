//! Replication experiments: limit-law agreement, empirical size, coverage and
//! sample-moment checks.
//!
//! Replication `r` simulates from `derive_seed(master, r)`. A replication that
//! errors is redrawn from `derive_seed(derive_seed(master, r), attempt)`; at
//! most 1% of `R` redraws are tolerated. Outcomes are stored in replication
//! order, so reports are identical for any thread count.

use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dgp::{simulate, DgpConfig, Sample};
use crate::error::{Error, Result};
use crate::inference::{
    confidence_interval_ols, confidence_interval_quantile, t_stat_ols, t_stat_quantile,
    two_sided_critical, DEFAULT_ALPHA,
};
use crate::limits::{normalize_stat, Estimator, LimitLaw, Regime, RegimeNormalization};
use crate::qr::{estimate_sparsity, fit_ols, fit_quantile, SolverMethod};
use crate::rng::derive_seed;

pub const MIN_REPLICATIONS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Size,
    Coverage,
    LimitLaw,
    MomentCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    /// Template configuration; its `seed` is the master seed.
    pub dgp: DgpConfig,
    pub estimator: Estimator,
    pub include_intercept: bool,
    pub replications: usize,
    pub purpose: Purpose,
    pub regime: Regime,
    /// Law the normalised statistics are compared against (limit-law runs).
    pub reference: Option<LimitLaw>,
    /// Test size; coverage runs use level `1 - alpha`.
    pub alpha: f64,
    /// Density `f(F^{-1}(tau))` used to scale the explosive-side quantile
    /// statistic. Defaults to the true innovation density.
    pub density: Option<f64>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl ExperimentSpec {
    /// Regime inferred from `dgp`, intercept included, `alpha = 0.05`.
    pub fn new(
        dgp: DgpConfig,
        estimator: Estimator,
        purpose: Purpose,
        replications: usize,
    ) -> Result<Self> {
        Ok(ExperimentSpec {
            regime: Regime::for_config(&dgp)?,
            dgp,
            estimator,
            include_intercept: true,
            replications,
            purpose,
            reference: None,
            alpha: DEFAULT_ALPHA,
            density: None,
            threads: None,
        })
    }

    pub fn with_reference(mut self, law: LimitLaw) -> Self {
        self.reference = Some(law);
        self
    }

    pub fn with_intercept(mut self, include: bool) -> Self {
        self.include_intercept = include;
        self
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    pub fn with_density(mut self, f: f64) -> Self {
        self.density = Some(f);
        self
    }

    pub fn with_alpha(mut self, alpha: f64) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn master_seed(&self) -> u64 {
        self.dgp.seed
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::InvalidConfig(format!(
                "need at least {MIN_REPLICATIONS} replications, got {}",
                self.replications
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 0.5) {
            return Err(Error::InvalidConfig(format!(
                "alpha must lie in (0, 0.5), got {}",
                self.alpha
            )));
        }
        if let Estimator::Quantile { tau } = self.estimator {
            crate::error::check_tau(tau)?;
        }
        if self.threads == Some(0) {
            return Err(Error::InvalidConfig("threads must be positive".into()));
        }
        self.dgp.validate()?;
        if self.purpose == Purpose::MomentCheck {
            if self.dgp.c == 0.0 {
                return Err(Error::InvalidConfig("moment check needs c != 0".into()));
            }
        } else {
            RegimeNormalization::new(self.regime, &self.dgp)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    /// `sigma^2 / (-2c)` for `c < 0`; none on the explosive side.
    pub target: Option<f64>,
    /// Mean of `(1 / (n sqrt(k_n))) sum y_{t-1}` for `c < 0`.
    pub drift_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub purpose: Purpose,
    pub replications: usize,
    /// One value per replication, in replication order: normalised
    /// statistics (limit law), t statistics (size, coverage) or sample
    /// moments (moment check).
    pub stats: Vec<f64>,
    pub empirical_size: Option<f64>,
    pub coverage: Option<f64>,
    pub ks_distance: Option<f64>,
    pub sample_mean: f64,
    pub sample_variance: f64,
    pub moments: Option<MomentSummary>,
    pub redraws: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

#[derive(Debug, Clone, Copy)]
struct Outcome {
    stat: f64,
    covered: Option<bool>,
    drift: Option<f64>,
}

impl Outcome {
    fn stat(stat: f64) -> Self {
        Outcome {
            stat,
            covered: None,
            drift: None,
        }
    }
}

/// Run `replicate` for `r = 0..replications` with seed substreams and redraws.
fn run_replications<F>(
    master: u64,
    replications: usize,
    threads: Option<usize>,
    replicate: F,
) -> Result<(Vec<Outcome>, usize)>
where
    F: Fn(u64) -> Result<Outcome> + Sync,
{
    let allowed = replications / 100;
    let work = || -> Vec<std::result::Result<(Outcome, usize), (usize, String)>> {
        (0..replications)
            .into_par_iter()
            .map(|r| {
                let stream = derive_seed(master, r as u64);
                let mut failures = 0;
                loop {
                    let seed = if failures == 0 {
                        stream
                    } else {
                        derive_seed(stream, failures as u64)
                    };
                    match replicate(seed) {
                        Ok(o) => return Ok((o, failures)),
                        Err(e) => {
                            failures += 1;
                            if failures > allowed {
                                return Err((failures, e.to_string()));
                            }
                        }
                    }
                }
            })
            .collect()
    };
    let results = match threads {
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?
            .install(work),
        None => work(),
    };
    let mut outcomes = Vec::with_capacity(replications);
    let mut failures = 0;
    let mut last = String::new();
    for r in results {
        match r {
            Ok((o, f)) => {
                outcomes.push(o);
                failures += f;
            }
            Err((f, msg)) => {
                failures += f;
                last = msg;
            }
        }
    }
    if failures > allowed || outcomes.len() < replications {
        return Err(Error::ExperimentFailure {
            failures,
            allowed,
            last,
        });
    }
    Ok((outcomes, failures))
}

fn mean_and_variance(v: &[f64]) -> (f64, f64) {
    let m = v.len() as f64;
    let mean = v.iter().sum::<f64>() / m;
    let var = if v.len() > 1 {
        v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    (mean, var)
}

/// Fraction of `|t| > critical`.
pub fn empirical_size(stats: &[f64], critical: f64) -> f64 {
    if stats.is_empty() {
        return 0.0;
    }
    stats.iter().filter(|t| t.abs() > critical).count() as f64 / stats.len() as f64
}

fn slope_statistic(spec: &ExperimentSpec, sample: &Sample) -> Result<Outcome> {
    let cfg = sample.config();
    let norm = RegimeNormalization::new(spec.regime, cfg)?;
    let y = sample.values();
    let rho_hat = match spec.estimator {
        Estimator::Ols => fit_ols(y, spec.include_intercept)?.rho_hat,
        Estimator::Quantile { tau } => {
            fit_quantile(y, tau, spec.include_intercept, SolverMethod::InteriorPoint)?.rho_hat
        }
    };
    let mut stat = normalize_stat(rho_hat, cfg, &norm)?;
    if let (Estimator::Quantile { tau }, Regime::NearExplosive) = (spec.estimator, spec.regime) {
        stat *= spec
            .density
            .unwrap_or_else(|| cfg.innovation.density_at_quantile(tau));
    }
    Ok(Outcome::stat(stat))
}

fn test_statistic(spec: &ExperimentSpec, sample: &Sample) -> Result<Outcome> {
    let y = sample.values();
    let rho0 = sample.rho();
    let level = 1.0 - spec.alpha;
    match spec.estimator {
        Estimator::Ols => {
            let fit = fit_ols(y, spec.include_intercept)?;
            let t = t_stat_ols(y, &fit, rho0)?;
            let covered = confidence_interval_ols(y, &fit, level)?.contains(rho0);
            Ok(Outcome {
                stat: t.statistic,
                covered: Some(covered),
                drift: None,
            })
        }
        Estimator::Quantile { tau } => {
            let fit = fit_quantile(y, tau, spec.include_intercept, SolverMethod::InteriorPoint)?;
            let sparsity = estimate_sparsity(&fit.residuals, tau)?;
            let t = t_stat_quantile(y, &fit, rho0, &sparsity)?;
            let covered = confidence_interval_quantile(y, &fit, &sparsity, level)?.contains(rho0);
            Ok(Outcome {
                stat: t.statistic,
                covered: Some(covered),
                drift: None,
            })
        }
    }
}

fn moment_statistic(sample: &Sample) -> Result<Outcome> {
    let cfg = sample.config();
    let y = sample.values();
    let lags = &y[..y.len() - 1];
    let n = cfg.n as f64;
    let k = cfg.k_n();
    let sum_sq: f64 = lags.iter().map(|v| v * v).sum();
    if cfg.c < 0.0 {
        let sum: f64 = lags.iter().sum();
        Ok(Outcome {
            stat: sum_sq / (n * k),
            covered: None,
            drift: Some(sum / (n * k.sqrt())),
        })
    } else {
        let scale = cfg.rho_pow_n()? * k;
        let stat = (sum_sq / scale) / scale;
        if !(stat.is_finite() && stat > 0.0) {
            return Err(Error::NumericFailure { t: cfg.n });
        }
        Ok(Outcome::stat(stat))
    }
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<McReport> {
    spec.validate()?;
    let start = Instant::now();
    let replicate = |seed: u64| -> Result<Outcome> {
        let sample = simulate(&spec.dgp.with_seed(seed))?;
        match spec.purpose {
            Purpose::LimitLaw => slope_statistic(spec, &sample),
            Purpose::Size | Purpose::Coverage => test_statistic(spec, &sample),
            Purpose::MomentCheck => moment_statistic(&sample),
        }
    };
    let (outcomes, redraws) = run_replications(
        spec.master_seed(),
        spec.replications,
        spec.threads,
        replicate,
    )?;

    let stats: Vec<f64> = outcomes.iter().map(|o| o.stat).collect();
    let (sample_mean, sample_variance) = mean_and_variance(&stats);
    let mut report = McReport {
        purpose: spec.purpose,
        replications: spec.replications,
        stats,
        empirical_size: None,
        coverage: None,
        ks_distance: None,
        sample_mean,
        sample_variance,
        moments: None,
        redraws,
        wall_time: Duration::ZERO,
    };
    match spec.purpose {
        Purpose::Size => {
            report.empirical_size = Some(empirical_size(
                &report.stats,
                two_sided_critical(spec.alpha),
            ));
        }
        Purpose::Coverage => {
            let hits = outcomes.iter().filter(|o| o.covered == Some(true)).count();
            report.coverage = Some(hits as f64 / outcomes.len() as f64);
        }
        Purpose::LimitLaw => {
            if let Some(law) = &spec.reference {
                let mut sorted = report.stats.clone();
                sorted.sort_by(f64::total_cmp);
                report.ks_distance = Some(ks_statistic(&sorted, law)?);
            }
        }
        Purpose::MomentCheck => {
            let cfg = &spec.dgp;
            report.moments = Some(if cfg.c < 0.0 {
                let drifts: Vec<f64> = outcomes.iter().filter_map(|o| o.drift).collect();
                MomentSummary {
                    target: Some(cfg.innovation.variance() / (-2.0 * cfg.c)),
                    drift_mean: Some(mean_and_variance(&drifts).0),
                }
            } else {
                MomentSummary {
                    target: None,
                    drift_mean: None,
                }
            });
        }
    }
    report.wall_time = start.elapsed();
    Ok(report)
}

/// Sample-moment experiment; `spec.purpose` is overridden.
pub fn moment_check(spec: &ExperimentSpec) -> Result<McReport> {
    let mut spec = spec.clone();
    spec.purpose = Purpose::MomentCheck;
    run_experiment(&spec)
}

fn check_sorted(sample: &[f64]) -> Result<()> {
    if sample.iter().any(|v| v.is_nan()) || sample.windows(2).any(|w| w[0] > w[1]) {
        Err(Error::Unsorted)
    } else {
        Ok(())
    }
}

/// Kolmogorov-Smirnov distance between a sorted sample and a law:
/// `max_i max(i/m - F(x_(i)), F(x_(i)) - (i-1)/m)`.
pub fn ks_statistic(sorted: &[f64], law: &LimitLaw) -> Result<f64> {
    let m = sorted.len();
    if m < 10 {
        return Err(Error::InsufficientData { needed: 10, got: m });
    }
    check_sorted(sorted)?;
    let mf = m as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = law.cdf(x);
            ((i + 1) as f64 / mf - f).max(f - i as f64 / mf)
        })
        .fold(0.0, f64::max))
}

/// `(theoretical, empirical)` quantile pairs at plotting positions
/// `(i - 0.5) / m`; Cauchy laws keep only positions in `[0.01, 0.99]`.
pub fn qq_data(sorted: &[f64], law: &LimitLaw) -> Result<Vec<(f64, f64)>> {
    let m = sorted.len();
    if m < 2 {
        return Err(Error::InsufficientData { needed: 2, got: m });
    }
    check_sorted(sorted)?;
    Ok(sorted
        .iter()
        .enumerate()
        .filter_map(|(i, &x)| {
            let p = (i as f64 + 0.5) / m as f64;
            if law.is_cauchy() && !(0.01..=0.99).contains(&p) {
                None
            } else {
                Some((law.quantile(p), x))
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::limits::EmpiricalLaw;

    #[test]
    fn ks_on_exact_quantiles() {
        let law = LimitLaw::normal(0.0, 1.0).unwrap();
        let m = 100;
        let s: Vec<f64> = (1..=m)
            .map(|i| law.quantile((i as f64 - 0.5) / m as f64))
            .collect();
        let d = ks_statistic(&s, &law).unwrap();
        // statrs inverts the normal CDF to about 1e-9
        assert!((d - 0.005).abs() < 1e-7, "{d}");
        let law = LimitLaw::cauchy(1.0, 2.0).unwrap();
        let s: Vec<f64> = (1..=m)
            .map(|i| law.quantile((i as f64 - 0.5) / m as f64))
            .collect();
        let d = ks_statistic(&s, &law).unwrap();
        assert!((d - 0.005).abs() < 1e-12, "{d}");
    }

    #[test]
    fn ks_point_mass() {
        let law = LimitLaw::cauchy(0.0, 1.0).unwrap();
        assert!(ks_statistic(&[0.0; 20], &law).unwrap() >= 0.5);
    }

    #[test]
    fn ks_rejects_bad_input() {
        let law = LimitLaw::normal(0.0, 1.0).unwrap();
        assert!(matches!(
            ks_statistic(&[0.0; 5], &law),
            Err(Error::InsufficientData { .. })
        ));
        let mut s: Vec<f64> = (0..20).map(f64::from).collect();
        s.swap(0, 1);
        assert!(matches!(ks_statistic(&s, &law), Err(Error::Unsorted)));
    }

    #[test]
    fn ks_self_comparison() {
        let s: Vec<f64> = (0..1500)
            .map(|i| (i as f64 * 0.37).sin() * 3.0 + i as f64 * 1e-3)
            .collect();
        let law = EmpiricalLaw::from_unsorted(s).unwrap();
        let sorted = law.values().to_vec();
        let d = ks_statistic(&sorted, &LimitLaw::Empirical(law)).unwrap();
        assert!(d <= 1.0 / sorted.len() as f64 + 1e-15, "{d}");
    }

    #[test]
    fn qq_on_exact_quantiles() {
        let law = LimitLaw::normal(1.0, 4.0).unwrap();
        let m = 50;
        let s: Vec<f64> = (1..=m)
            .map(|i| law.quantile((i as f64 - 0.5) / m as f64))
            .collect();
        let qq = qq_data(&s, &law).unwrap();
        assert_eq!(qq.len(), m);
        for w in qq.windows(2) {
            assert!(w[0].0 <= w[1].0 && w[0].1 <= w[1].1);
        }
        assert!(qq.iter().all(|(a, b)| (a - b).abs() < 1e-12));

        let cauchy = LimitLaw::cauchy(0.0, 1.0).unwrap();
        let s: Vec<f64> = (0..1000).map(|i| (i as f64 - 500.0) * 0.01).collect();
        let qq = qq_data(&s, &cauchy).unwrap();
        // positions (i + 0.5) / 1000 in [0.01, 0.99]: i = 10..=989
        assert_eq!(qq.len(), 980);
        assert!(qq.iter().all(|(a, _)| a.is_finite()));
    }

    #[test]
    fn forced_zero_statistic_has_zero_size() {
        assert_eq!(empirical_size(&[0.0; 500], two_sided_critical(0.05)), 0.0);
    }

    #[test]
    fn size_monotone_in_critical_value() {
        let stats: Vec<f64> = (0..400).map(|i| ((i as f64) * 0.731).sin() * 3.0).collect();
        let mut prev = 1.0;
        for crit in [0.0, 0.5, 1.0, 1.96, 2.5, 3.1] {
            let s = empirical_size(&stats, crit);
            assert!(s <= prev);
            prev = s;
        }
    }

    #[test]
    fn spec_validation() {
        let dgp = DgpConfig::new(200, -1.0, 0.5, 1);
        let spec = ExperimentSpec::new(dgp, Estimator::Ols, Purpose::Size, 50).unwrap();
        assert!(matches!(
            run_experiment(&spec),
            Err(Error::InvalidConfig(_))
        ));
        let mut spec = ExperimentSpec::new(dgp, Estimator::Ols, Purpose::LimitLaw, 100).unwrap();
        spec.regime = Regime::NearExplosive;
        assert!(matches!(
            run_experiment(&spec),
            Err(Error::RegimeMismatch(_))
        ));
    }

    #[test]
    fn failing_replications_are_bounded() {
        let err =
            run_replications(1, 200, Some(2), |_| Err(Error::SingularDesign("x"))).unwrap_err();
        assert!(matches!(err, Error::ExperimentFailure { allowed: 2, .. }));
        // a replication that fails once is redrawn
        let fail_first = derive_seed(5, 3);
        let (out, redraws) = run_replications(5, 200, Some(2), |seed| {
            if seed == fail_first {
                Err(Error::SingularDesign("x"))
            } else {
                Ok(Outcome::stat(seed as f64))
            }
        })
        .unwrap();
        assert_eq!(redraws, 1);
        assert_eq!(out.len(), 200);
    }

    #[test]
    fn explosive_moment_check_is_positive() {
        let dgp = DgpConfig::new(500, 1.0, 0.7, 3);
        let spec = ExperimentSpec::new(dgp, Estimator::Ols, Purpose::MomentCheck, 100).unwrap();
        let rep = moment_check(&spec).unwrap();
        assert!(rep.stats.iter().all(|s| s.is_finite() && *s > 0.0));
        assert_eq!(rep.moments.unwrap().target, None);
    }

    #[test]
    fn reruns_and_thread_counts_agree() {
        let dgp = DgpConfig::new(300, -1.0, 0.5, 77);
        let spec =
            ExperimentSpec::new(dgp, Estimator::Quantile { tau: 0.5 }, Purpose::Size, 100).unwrap();
        let a = run_experiment(&spec.clone().with_threads(1)).unwrap();
        let b = run_experiment(&spec.clone().with_threads(4)).unwrap();
        assert_eq!(a.stats, b.stats);
        assert_eq!(a.empirical_size, b.empirical_size);
    }
}
