//! Quantile and least-squares estimation of the first-order autoregression.

mod bootstrap;
mod check;
mod design;
mod ols;
mod solver;
mod sparsity;

pub use bootstrap::{
    bootstrap_xy, bootstrap_xy_design, BootstrapSe, DEFAULT_REPLICATES, MIN_REPLICATES,
};
pub use check::{check_loss, knight_gap, psi};
pub use design::Design;
pub use ols::{fit_ols, fit_ols_design, OlsFit};
pub use solver::{
    fit_quantile, fit_quantile_design, objective, subgradient_sums, QuantileFit, SolverInfo,
    SolverMethod,
};
pub use sparsity::{
    estimate_sparsity, hall_sheather_bandwidth, sample_quantile, SparsityEstimate, MIN_RESIDUALS,
};

pub(crate) use check::psi_unchecked;
