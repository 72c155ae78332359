//! Exact maximum-likelihood estimation of drift `mu` and scale `sigma^2` for
//! `Y_t = mu t + sigma B^H_t` observed at `t_k = k h`, with known Hurst exponent.
//!
//! The crate provides the covariance algebra of fractional Brownian motion on a
//! grid, two exact path samplers, the closed-form estimators and a Monte Carlo
//! harness that checks their finite-sample laws.

pub mod cli;
pub mod covariance;
pub mod error;
pub mod estimators;
pub mod harness;
pub mod ks;
pub mod linalg;
pub mod model;
pub mod parallel;
pub mod synthesis;
pub mod table;
pub mod validate;

pub use covariance::{
    factorize, gerschgorin_bound, quad_forms, FbmCovariance, IncrementLevinson, QuadraticForms, Whitener,
};
pub use error::{Error, Result};
pub use estimators::{estimate, log_likelihood, standardized_stats, EstimateReport, MleEstimator, StandardizedStats};
pub use harness::{replicate, run_experiment, run_experiment_with, ExperimentConfig, ExperimentSummary, HurstRecord};
pub use ks::{ks_chi_square, ks_normality};
pub use model::{build_gamma, fbm_cov, fgn_autocovariance, HurstExponent, ModelParams, ObservationPath, SamplingGrid};
pub use parallel::Execution;
pub use synthesis::{
    normal_stream, sample_cholesky, sample_davies_harte, FbmSampler, SamplerKind, SimulationSeed,
};
pub use table::{emit_table, TableFormat};
