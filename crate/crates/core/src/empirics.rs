//! Price ingestion and side-by-side estimation reports for linear and
//! quantile autoregressions.

use std::fmt::Write as _;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{check_tau, IngestError, Result};
use crate::qr::{bootstrap_xy, fit_ols, fit_quantile, Design, SolverMethod};

pub const MIN_SERIES_LEN: usize = 30;

#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    dates: Vec<NaiveDate>,
    prices: Vec<f64>,
    name: String,
}

impl PriceSeries {
    /// Sorts by date; rejects duplicate dates, non-positive prices and short input.
    pub fn new(name: impl Into<String>, mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        if let Some(i) = rows.iter().position(|r| !(r.1 > 0.0 && r.1.is_finite())) {
            return Err(IngestError::BadPrice {
                row: i as u64 + 1,
                value: rows[i].1.to_string(),
            }
            .into());
        }
        let original: Vec<NaiveDate> = rows.iter().map(|r| r.0).collect();
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            let row = original.iter().rposition(|d| *d == w[0].0).unwrap_or(0);
            return Err(IngestError::DuplicateDate {
                row: row as u64 + 1,
                date: w[0].0.to_string(),
            }
            .into());
        }
        if rows.len() < MIN_SERIES_LEN {
            return Err(IngestError::TooShort {
                len: rows.len(),
                min: MIN_SERIES_LEN,
            }
            .into());
        }
        let (dates, prices) = rows.into_iter().unzip();
        Ok(PriceSeries {
            dates,
            prices,
            name: name.into(),
        })
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }

    pub fn log_prices(&self) -> Vec<f64> {
        self.prices.iter().map(|p| p.ln()).collect()
    }
}

/// Read `date_column` (ISO `YYYY-MM-DD`) and `price_column` from a headed CSV.
/// Row numbers in errors count file lines, the header being line 1.
pub fn load_csv(
    path: impl AsRef<Path>,
    date_column: &str,
    price_column: &str,
) -> Result<PriceSeries> {
    let path = path.as_ref();
    let (mut reader, idx) = open_csv(path, &[date_column, price_column])?;
    let (di, pi) = (idx[0], idx[1]);

    let mut rows = Vec::new();
    let mut seen = std::collections::HashMap::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(IngestError::from)?;
        let row = i as u64 + 2;
        let raw_date = record.get(di).unwrap_or("");
        let date =
            NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| IngestError::BadDate {
                row,
                value: raw_date.to_string(),
            })?;
        let raw_price = record.get(pi).unwrap_or("");
        let price = raw_price
            .parse::<f64>()
            .ok()
            .filter(|p| *p > 0.0 && p.is_finite())
            .ok_or_else(|| IngestError::BadPrice {
                row,
                value: raw_price.to_string(),
            })?;
        if seen.insert(date, row).is_some() {
            return Err(IngestError::DuplicateDate {
                row,
                date: date.to_string(),
            }
            .into());
        }
        rows.push((date, price));
    }
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    PriceSeries::new(name, rows)
}

/// Read one numeric column of a headed CSV, in file order.
pub fn load_column(path: impl AsRef<Path>, column: &str) -> Result<Vec<f64>> {
    let (mut reader, idx) = open_csv(path.as_ref(), &[column])?;
    let mut out = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(IngestError::from)?;
        let raw = record.get(idx[0]).unwrap_or("");
        let v = raw
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| IngestError::BadValue {
                row: i as u64 + 2,
                column: column.to_string(),
                value: raw.to_string(),
            })?;
        out.push(v);
    }
    Ok(out)
}

fn open_csv(path: &Path, columns: &[&str]) -> Result<(csv::Reader<std::fs::File>, Vec<usize>)> {
    let file = std::fs::File::open(path).map_err(|source| IngestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader.headers().map_err(IngestError::from)?.clone();
    let idx = columns
        .iter()
        .map(|name| {
            headers
                .iter()
                .position(|h| h == *name)
                .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
        })
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok((reader, idx))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelLabel {
    Linear,
    Quantile { tau: f64 },
}

impl ModelLabel {
    pub fn tau(&self) -> Option<f64> {
        match self {
            ModelLabel::Linear => None,
            ModelLabel::Quantile { tau } => Some(*tau),
        }
    }
}

impl std::fmt::Display for ModelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelLabel::Linear => write!(f, "linear"),
            ModelLabel::Quantile { tau } => write!(f, "QR(tau={tau})"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    /// `mu` or `rho`.
    pub name: String,
    pub estimate: f64,
    pub se: f64,
    /// `estimate / se`, absent when `se` is zero.
    pub tstat: Option<f64>,
}

impl Coefficient {
    pub fn new(name: &str, estimate: f64, se: f64) -> Self {
        Coefficient {
            name: name.to_string(),
            estimate,
            se,
            tstat: (se > 0.0).then(|| estimate / se),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub model: ModelLabel,
    pub intercept: bool,
    /// Intercept first when present, then slope.
    pub coefs: Vec<Coefficient>,
}

impl ReportRow {
    pub fn coef(&self, name: &str) -> Option<&Coefficient> {
        self.coefs.iter().find(|c| c.name == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReportOptions {
    pub replicates: usize,
    pub seed: u64,
    /// Fit natural-log prices instead of levels.
    pub log: bool,
}

/// Linear then one quantile model per `tau`, each without and with an
/// intercept. The t ratios test each coefficient against zero.
pub fn table1_report(
    series: &PriceSeries,
    taus: &[f64],
    opts: &ReportOptions,
) -> Result<Vec<ReportRow>> {
    for &tau in taus {
        check_tau(tau)?;
    }
    let y = if opts.log {
        series.log_prices()
    } else {
        series.prices().to_vec()
    };
    let mut rows = Vec::with_capacity(2 * (taus.len() + 1));
    for intercept in [false, true] {
        let fit = fit_ols(&y, intercept)?;
        let (se_mu, se_rho) = fit.standard_errors(&Design::from_series(&y)?);
        let mut coefs = Vec::new();
        if let (Some(mu), Some(se)) = (fit.mu_hat, se_mu) {
            coefs.push(Coefficient::new("mu", mu, se));
        }
        coefs.push(Coefficient::new("rho", fit.rho_hat, se_rho));
        rows.push(ReportRow {
            model: ModelLabel::Linear,
            intercept,
            coefs,
        });
    }
    for &tau in taus {
        for intercept in [false, true] {
            let fit = fit_quantile(&y, tau, intercept, SolverMethod::InteriorPoint)?;
            let se = bootstrap_xy(&y, tau, intercept, opts.replicates, opts.seed)?;
            let mut coefs = Vec::new();
            if let (Some(mu), Some(s)) = (fit.mu_hat, se.se_mu) {
                coefs.push(Coefficient::new("mu", mu, s));
            }
            coefs.push(Coefficient::new("rho", fit.rho_hat, se.se_rho));
            rows.push(ReportRow {
                model: ModelLabel::Quantile { tau },
                intercept,
                coefs,
            });
        }
    }
    // linear first, then by tau; no-intercept before intercept within a model
    rows.sort_by(|a, b| {
        let key = |r: &ReportRow| r.model.tau().unwrap_or(-1.0);
        key(a)
            .total_cmp(&key(b))
            .then(a.intercept.cmp(&b.intercept))
    });
    Ok(rows)
}

/// One line per coefficient: `model,tau,intercept,coef,estimate,se,tstat`.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from("model,tau,intercept,coef,estimate,se,tstat\n");
    for r in rows {
        let (model, tau) = match r.model {
            ModelLabel::Linear => ("linear", String::new()),
            ModelLabel::Quantile { tau } => ("qr", tau.to_string()),
        };
        for c in &r.coefs {
            let t = c.tstat.map(|t| t.to_string()).unwrap_or_default();
            let _ = writeln!(
                out,
                "{model},{tau},{},{},{},{},{t}",
                r.intercept, c.name, c.estimate, c.se
            );
        }
    }
    out
}

/// `***` below 0.01, `**` below 0.05, `*` below 0.1 (two-sided normal p-value).
pub fn significance_stars(t: f64) -> &'static str {
    let p = 2.0 * Normal::standard().sf(t.abs());
    if p < 0.01 {
        "***"
    } else if p < 0.05 {
        "**"
    } else if p < 0.1 {
        "*"
    } else {
        ""
    }
}

/// Four decimals below 10 in magnitude, four significant digits above.
pub fn format_tstat(t: f64) -> String {
    let a = t.abs();
    if a < 10.0 {
        return format!("{t:.4}");
    }
    let digits = a.log10().floor() as i32 + 1;
    let decimals = (4 - digits).max(0) as usize;
    format!("{t:.decimals$}")
}

/// `(theta_hat, se, t)` as printed in the table, stars attached to `t`.
pub fn format_triple(c: &Coefficient) -> (String, String, String) {
    let t = c
        .tstat
        .map(|t| format!("{}{}", format_tstat(t), significance_stars(t)))
        .unwrap_or_default();
    (format!("{:.4}", c.estimate), format!("{:.4}", c.se), t)
}

/// Pretty table: no-intercept fit on the left, intercept fit on the right,
/// a `mu` line then a `rho` line per model.
pub fn render_table(title: &str, rows: &[ReportRow]) -> String {
    const W: usize = 11;
    let mut out = String::new();
    let head = format!(
        "{:<14}{:<5}{:>W$}{:>W$}{:>W$}   {:>W$}{:>W$}{:>W$}",
        "", "", "theta", "s.e.", "t", "theta", "s.e.", "t"
    );
    let rule = "-".repeat(head.len());
    let _ = writeln!(out, "{title}");
    let _ = writeln!(out, "{rule}");
    let _ = writeln!(
        out,
        "{:<19}{:^w3$}   {:^w3$}",
        "",
        "no intercept",
        "intercept",
        w3 = 3 * W
    );
    let _ = writeln!(out, "{head}");
    let _ = writeln!(out, "{rule}");

    let mut models: Vec<ModelLabel> = Vec::new();
    for r in rows {
        if !models.contains(&r.model) {
            models.push(r.model);
        }
    }
    let cell = |model: ModelLabel, intercept: bool, name: &str| {
        rows.iter()
            .find(|r| r.model == model && r.intercept == intercept)
            .and_then(|r| r.coef(name))
            .map(format_triple)
            .unwrap_or_default()
    };
    for model in models {
        for (i, name) in ["mu", "rho"].into_iter().enumerate() {
            let label = if i == 0 {
                model.to_string()
            } else {
                String::new()
            };
            let (a0, a1, a2) = cell(model, false, name);
            let (b0, b1, b2) = cell(model, true, name);
            let _ = writeln!(
                out,
                "{label:<14}{name:<5}{a0:>W$}{a1:>W$}{a2:>W$}   {b0:>W$}{b1:>W$}{b2:>W$}"
            );
        }
        let _ = writeln!(out, "{rule}");
    }
    out
}
