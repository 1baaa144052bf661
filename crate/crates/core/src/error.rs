use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("explosive overflow: c * n^(1-gamma) = {exponent:.3} exceeds the limit of {limit}")]
    ExplosiveOverflow { exponent: f64, limit: f64 },

    #[error("numeric failure: non-finite value at t = {t}")]
    NumericFailure { t: usize },

    #[error("quantile level tau = {0} is outside (0, 1)")]
    InvalidTau(f64),

    #[error("singular design: {0}")]
    SingularDesign(&'static str),

    #[error("interior point solver did not converge after {iterations} iterations (gap {gap:e})")]
    SolverFailure { iterations: usize, gap: f64 },

    #[error("insufficient data: need at least {needed} observations, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error(
        "bootstrap failed: {failures} singular resamples exceeded the budget of {budget} attempts"
    )]
    BootstrapFailure { failures: usize, budget: usize },

    #[error("regime mismatch: {0}")]
    RegimeMismatch(String),

    #[error("OU discretization failed: {redraws} degenerate draws out of {draws}")]
    DiscretizationFailure { redraws: usize, draws: usize },

    #[error("experiment failed: {failures} replication errors exceed the allowance of {allowed} (last: {last})")]
    ExperimentFailure {
        failures: usize,
        allowed: usize,
        last: String,
    },

    #[error("input sample is not sorted ascending")]
    Unsorted,

    #[error(transparent)]
    Ingest(#[from] IngestError),
}

/// CSV ingestion failures. Row numbers are 1-based file lines (the header is line 1).
#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),

    #[error("missing column `{0}`")]
    MissingColumn(String),

    #[error("row {row}: cannot parse date `{value}`")]
    BadDate { row: u64, value: String },

    #[error("row {row}: invalid price `{value}`")]
    BadPrice { row: u64, value: String },

    #[error("row {row}: invalid number `{value}` in column `{column}`")]
    BadValue {
        row: u64,
        column: String,
        value: String,
    },

    #[error("row {row}: duplicate date {date}")]
    DuplicateDate { row: u64, date: String },

    #[error("series too short: {len} observations, need at least {min}")]
    TooShort { len: usize, min: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidTau(tau))
    }
}
