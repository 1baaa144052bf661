use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, ValueEnum};
use serde::Serialize;

use qarlab::dgp::{simulate as run_dgp, DgpConfig, InnovationKind};
use qarlab::empirics::{
    load_column, load_csv, render_table, report_csv, table1_report, Coefficient, ModelLabel,
    ReportOptions, ReportRow,
};
use qarlab::limits::{
    reference_law_near_explosive, reference_law_near_stationary, sample_ou_ratio, Estimator,
    LimitLaw, Regime,
};
use qarlab::montecarlo::{qq_data, run_experiment, ExperimentSpec, McReport, Purpose};
use qarlab::qr::{bootstrap_xy, fit_ols, fit_quantile, Design, SolverMethod};

use crate::{manifest, CliError};

type CmdResult = Result<(), CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Dist {
    Gaussian,
    StudentT,
}

#[derive(Debug, Args, Serialize)]
pub struct DgpArgs {
    /// Number of observations after y_0.
    #[arg(long)]
    n: usize,
    /// Persistence coefficient in rho = 1 + c / n^gamma.
    #[arg(long, allow_negative_numbers = true)]
    c: f64,
    /// Rate exponent in (0, 1].
    #[arg(long)]
    gamma: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    mu: f64,
    #[arg(long, value_enum, default_value_t = Dist::Gaussian)]
    dist: Dist,
    /// Standard deviation (Gaussian) or scale (Student-t).
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Student-t degrees of freedom, above 2.
    #[arg(long)]
    df: Option<f64>,
    /// Master seed.
    #[arg(long, env = "QARLAB_SEED", default_value_t = 0)]
    seed: u64,
}

impl DgpArgs {
    fn config(&self) -> Result<DgpConfig, CliError> {
        let innovation = match self.dist {
            Dist::Gaussian => InnovationKind::Gaussian { sigma: self.sigma },
            Dist::StudentT => InnovationKind::StudentT {
                df: self
                    .df
                    .ok_or_else(|| CliError::Validation("--dist student-t needs --df".into()))?,
                scale: self.sigma,
            },
        };
        let cfg = DgpConfig::new(self.n, self.c, self.gamma, self.seed)
            .with_mu(self.mu)
            .with_innovation(innovation);
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[command(flatten)]
    dgp: DgpArgs,
    /// Output CSV with columns `t,y`.
    #[arg(long)]
    out: PathBuf,
}

pub fn simulate(args: &SimulateArgs) -> CmdResult {
    let start = Instant::now();
    let sample = run_dgp(&args.dgp.config()?)?;
    let mut csv = String::from("t,y\n");
    for (t, y) in sample.values().iter().enumerate() {
        let _ = writeln!(csv, "{t},{y}");
    }
    std::fs::write(&args.out, csv)?;
    manifest::write(&args.out, "simulate", args, args.dgp.seed, start.elapsed())?;
    println!(
        "wrote {} observations to {}",
        sample.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct FitArgs {
    /// Input CSV.
    #[arg(long = "in")]
    input: PathBuf,
    /// Column holding the series.
    #[arg(long, default_value = "y")]
    column: String,
    /// Quantile level; repeat for several.
    #[arg(long, required_unless_present = "ols")]
    tau: Vec<f64>,
    /// Least squares instead of quantile regression.
    #[arg(long, conflicts_with = "tau")]
    ols: bool,
    #[arg(long)]
    intercept: bool,
    /// Bootstrap replicates for quantile standard errors.
    #[arg(long, default_value_t = qarlab::qr::DEFAULT_REPLICATES)]
    bootstrap: usize,
    #[arg(long, env = "QARLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Write the coefficient table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn fit(args: &FitArgs) -> CmdResult {
    let start = Instant::now();
    let y = load_column(&args.input, &args.column)?;
    let mut rows = Vec::new();
    if args.ols {
        let fit = fit_ols(&y, args.intercept)?;
        let (se_mu, se_rho) = fit.standard_errors(&Design::from_series(&y)?);
        let mut coefs = Vec::new();
        if let (Some(mu), Some(se)) = (fit.mu_hat, se_mu) {
            coefs.push(Coefficient::new("mu", mu, se));
        }
        coefs.push(Coefficient::new("rho", fit.rho_hat, se_rho));
        rows.push(ReportRow {
            model: ModelLabel::Linear,
            intercept: args.intercept,
            coefs,
        });
    }
    for &tau in &args.tau {
        let fit = fit_quantile(&y, tau, args.intercept, SolverMethod::InteriorPoint)?;
        let se = bootstrap_xy(&y, tau, args.intercept, args.bootstrap, args.seed)?;
        let mut coefs = Vec::new();
        if let (Some(mu), Some(s)) = (fit.mu_hat, se.se_mu) {
            coefs.push(Coefficient::new("mu", mu, s));
        }
        coefs.push(Coefficient::new("rho", fit.rho_hat, se.se_rho));
        rows.push(ReportRow {
            model: ModelLabel::Quantile { tau },
            intercept: args.intercept,
            coefs,
        });
    }

    println!(
        "{:<14}{:<6}{:>12}{:>12}{:>14}",
        "model", "coef", "estimate", "s.e.", "t"
    );
    for r in &rows {
        for c in &r.coefs {
            let (est, se, t) = qarlab::empirics::format_triple(c);
            println!(
                "{:<14}{:<6}{est:>12}{se:>12}{t:>14}",
                r.model.to_string(),
                c.name
            );
        }
    }
    if let Some(out) = &args.out {
        std::fs::write(out, report_csv(&rows))?;
        manifest::write(out, "fit", args, args.seed, start.elapsed())?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PurposeArg {
    Size,
    Coverage,
    LimitLaw,
    Moments,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorArg {
    Ols,
    Qr,
}

#[derive(Debug, Args, Serialize)]
pub struct McArgs {
    #[arg(long, value_enum)]
    purpose: PurposeArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Ols)]
    estimator: EstimatorArg,
    /// Quantile level for `--estimator qr`.
    #[arg(long, default_value_t = 0.5)]
    tau: f64,
    #[command(flatten)]
    dgp: DgpArgs,
    /// Fit an intercept in every replication.
    #[arg(long)]
    intercept: bool,
    /// Replications, at least 100.
    #[arg(long, default_value_t = 1000)]
    reps: usize,
    /// Worker threads; defaults to all cores.
    #[arg(long)]
    threads: Option<usize>,
    /// Test size (coverage level is 1 - alpha).
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Grid points per path when the reference law is simulated.
    #[arg(long, default_value_t = 4096)]
    ou_grid: usize,
    /// Paths drawn when the reference law is simulated.
    #[arg(long, default_value_t = 20_000)]
    ou_draws: usize,
    /// JSON report.
    #[arg(long)]
    out: Option<PathBuf>,
    /// QQ pairs `theoretical,empirical` against the reference law.
    #[arg(long)]
    qq_out: Option<PathBuf>,
}

/// Limit law for the normalised slope under `spec`, if one is available.
fn reference_law(spec: &ExperimentSpec, args: &McArgs) -> Result<Option<LimitLaw>, CliError> {
    let cfg = &spec.dgp;
    let sigma = cfg.innovation.sigma();
    let law = match spec.regime {
        Regime::NearStationary => {
            // least squares ignores the density
            let tau = match spec.estimator {
                Estimator::Quantile { tau } => tau,
                Estimator::Ols => 0.5,
            };
            let f = cfg.innovation.density_at_quantile(tau);
            Some(reference_law_near_stationary(
                spec.estimator,
                cfg.c,
                sigma,
                f,
            )?)
        }
        Regime::NearExplosive => Some(reference_law_near_explosive(spec.estimator, sigma)?),
        // demeaned ratio: least squares with an intercept only
        Regime::UnitGamma1 if spec.estimator == Estimator::Ols && spec.include_intercept => Some(
            sample_ou_ratio(cfg.c, args.ou_grid, args.ou_draws, cfg.seed ^ 0x6f75)?,
        ),
        Regime::UnitGamma1 => None,
    };
    Ok(law)
}

fn summary(report: &McReport, regime: Regime) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "purpose       {:?}", report.purpose);
    let _ = writeln!(s, "regime        {regime:?}");
    let _ = writeln!(s, "replications  {}", report.replications);
    let _ = writeln!(s, "mean          {:.6}", report.sample_mean);
    let _ = writeln!(s, "variance      {:.6}", report.sample_variance);
    let optional = [
        ("ks distance", report.ks_distance),
        ("size", report.empirical_size),
        ("coverage", report.coverage),
        ("moment target", report.moments.and_then(|m| m.target)),
        ("drift mean", report.moments.and_then(|m| m.drift_mean)),
    ];
    for (name, v) in optional {
        if let Some(v) = v {
            let _ = writeln!(s, "{name:<14}{v:.6}");
        }
    }
    let _ = writeln!(s, "redraws       {}", report.redraws);
    let _ = writeln!(s, "wall time     {:.2}s", report.wall_time.as_secs_f64());
    s
}

pub fn mc(args: &McArgs) -> CmdResult {
    let start = Instant::now();
    let dgp = args.dgp.config()?;
    let estimator = match args.estimator {
        EstimatorArg::Ols => Estimator::Ols,
        EstimatorArg::Qr => Estimator::Quantile { tau: args.tau },
    };
    let purpose = match args.purpose {
        PurposeArg::Size => Purpose::Size,
        PurposeArg::Coverage => Purpose::Coverage,
        PurposeArg::LimitLaw => Purpose::LimitLaw,
        PurposeArg::Moments => Purpose::MomentCheck,
    };
    let mut spec = ExperimentSpec::new(dgp, estimator, purpose, args.reps)?
        .with_intercept(args.intercept)
        .with_alpha(args.alpha);
    if let Some(t) = args.threads {
        spec = spec.with_threads(t);
    }
    spec.validate()?;
    if purpose == Purpose::LimitLaw {
        if let Some(law) = reference_law(&spec, args)? {
            spec = spec.with_reference(law);
        }
    }
    if args.qq_out.is_some() && spec.reference.is_none() {
        return Err(CliError::Validation(
            "--qq-out needs a limit-law run with a reference law".into(),
        ));
    }

    let report = run_experiment(&spec)?;
    print!("{}", summary(&report, spec.regime));

    if let Some(out) = &args.out {
        let json = serde_json::to_string_pretty(&report).map_err(std::io::Error::other)?;
        std::fs::write(out, json + "\n")?;
        manifest::write(out, "mc", args, args.dgp.seed, start.elapsed())?;
    }
    if let (Some(path), Some(law)) = (&args.qq_out, &spec.reference) {
        write_qq(path, &report, law)?;
        manifest::write(path, "mc", args, args.dgp.seed, start.elapsed())?;
    }
    Ok(())
}

fn write_qq(path: &Path, report: &McReport, law: &LimitLaw) -> CmdResult {
    let mut sorted = report.stats.clone();
    sorted.sort_by(f64::total_cmp);
    let mut csv = String::from("theoretical,empirical\n");
    for (q, x) in qq_data(&sorted, law)? {
        let _ = writeln!(csv, "{q},{x}");
    }
    std::fs::write(path, csv)?;
    Ok(())
}

#[derive(Debug, Args, Serialize)]
pub struct EmpiricalArgs {
    /// Price CSV.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value = "date")]
    date_column: String,
    #[arg(long, default_value = "price")]
    price_column: String,
    /// Quantile levels, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.5,0.95")]
    taus: Vec<f64>,
    #[arg(long, default_value_t = qarlab::qr::DEFAULT_REPLICATES)]
    bootstrap: usize,
    #[arg(long, env = "QARLAB_SEED", default_value_t = 0)]
    seed: u64,
    /// Fit natural-log prices.
    #[arg(long)]
    log: bool,
    /// Report CSV `model,tau,intercept,coef,estimate,se,tstat`.
    #[arg(long)]
    out: Option<PathBuf>,
}

pub fn empirical(args: &EmpiricalArgs) -> CmdResult {
    let start = Instant::now();
    let series = load_csv(&args.input, &args.date_column, &args.price_column)?;
    let opts = ReportOptions {
        replicates: args.bootstrap,
        seed: args.seed,
        log: args.log,
    };
    let rows = table1_report(&series, &args.taus, &opts)?;
    print!("{}", render_table(series.name(), &rows));
    if let Some(out) = &args.out {
        std::fs::write(out, report_csv(&rows))?;
        manifest::write(out, "empirical", args, args.seed, start.elapsed())?;
    }
    Ok(())
}
