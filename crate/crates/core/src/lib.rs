//! Quantile autoregression with roots moderately close to unity.
//!
//! The crate simulates `y_t = mu + rho_n y_{t-1} + eps_t` with
//! `rho_n = 1 + c / n^gamma`, estimates the slope by check-loss (quantile)
//! regression and least squares, and compares the normalised estimates with
//! their limit laws by Monte Carlo.
//!
//! - [`dgp`]: data generation
//! - [`qr`]: check-loss primitives, solvers, OLS, sparsity, pairs bootstrap
//! - [`limits`]: normalisations, reference laws, OU functional sampler
//! - [`inference`]: t statistics and confidence intervals
//! - [`montecarlo`]: replication experiments and goodness of fit
//! - [`empirics`]: CSV price ingestion and estimation tables

pub mod dgp;
pub mod empirics;
pub mod error;
pub mod inference;
pub mod limits;
pub mod montecarlo;
pub mod qr;
pub mod rng;

pub use error::{Error, IngestError, Result};
