//! Replicated simulate-then-estimate experiments and their summaries.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::covariance::factorize;
use crate::error::{Error, Result};
use crate::estimators::{standardized_stats, EstimateReport, MleEstimator, StandardizedStats};
use crate::ks::{ks_chi_square, ks_normality, MIN_KS_SAMPLES};
use crate::model::{HurstExponent, ModelParams, SamplingGrid};
use crate::parallel::{try_map_indexed, Execution};
use crate::synthesis::{build_sampler, CholeskySampler, FbmSampler, SamplerKind, SimulationSeed};

pub const DEFAULT_STEP_H: f64 = 1.0;
pub const DEFAULT_COUNT_N: usize = 1000;
pub const DEFAULT_REPLICATIONS: usize = 1000;
pub const DEFAULT_ROOT_SEED: u64 = 20_100_817;
pub const DEFAULT_HURST_LIST: [f64; 4] = [0.25, 0.45, 0.55, 0.75];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigFile", into = "ConfigFile")]
pub struct ExperimentConfig {
    pub mu: f64,
    pub sigma_sq: f64,
    pub hurst_list: Vec<HurstExponent>,
    pub grid: SamplingGrid,
    pub replications: usize,
    pub root_seed: u64,
    pub sampler: SamplerKind,
}

/// Flat on-disk form of [`ExperimentConfig`]; missing keys take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub mu: f64,
    pub sigma_sq: f64,
    #[serde(default = "default_hurst_list")]
    pub hurst_list: Vec<f64>,
    #[serde(default = "default_step_h")]
    pub step_h: f64,
    #[serde(default = "default_count_n")]
    pub count_n: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    #[serde(default = "default_root_seed")]
    pub root_seed: u64,
    #[serde(default)]
    pub sampler: SamplerKind,
}

fn default_hurst_list() -> Vec<f64> {
    DEFAULT_HURST_LIST.to_vec()
}
fn default_step_h() -> f64 {
    DEFAULT_STEP_H
}
fn default_count_n() -> usize {
    DEFAULT_COUNT_N
}
fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}
fn default_root_seed() -> u64 {
    DEFAULT_ROOT_SEED
}

impl TryFrom<ConfigFile> for ExperimentConfig {
    type Error = Error;

    fn try_from(f: ConfigFile) -> Result<Self> {
        let params_check = |h| ModelParams::new(f.mu, f.sigma_sq, h);
        if f.hurst_list.is_empty() {
            return Err(Error::Config("hurst_list is empty".into()));
        }
        let hurst_list = f
            .hurst_list
            .iter()
            .map(|&h| HurstExponent::new(h))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::Config(e.to_string()))?;
        params_check(hurst_list[0]).map_err(|e| Error::Config(e.to_string()))?;
        let grid = SamplingGrid::new(f.step_h, f.count_n).map_err(|e| Error::Config(e.to_string()))?;
        if f.replications < 2 {
            return Err(Error::Config(format!(
                "replications must be at least 2, got {}",
                f.replications
            )));
        }
        Ok(Self {
            mu: f.mu,
            sigma_sq: f.sigma_sq,
            hurst_list,
            grid,
            replications: f.replications,
            root_seed: f.root_seed,
            sampler: f.sampler,
        })
    }
}

impl From<ExperimentConfig> for ConfigFile {
    fn from(c: ExperimentConfig) -> Self {
        Self {
            mu: c.mu,
            sigma_sq: c.sigma_sq,
            hurst_list: c.hurst_list.iter().map(|h| h.value()).collect(),
            step_h: c.grid.step(),
            count_n: c.grid.len(),
            replications: c.replications,
            root_seed: c.root_seed,
            sampler: c.sampler,
        }
    }
}

impl ExperimentConfig {
    /// A config with the default grid, replication count, seed and sampler.
    pub fn with_defaults(mu: f64, sigma_sq: f64, hurst_list: &[f64]) -> Result<Self> {
        ConfigFile {
            mu,
            sigma_sq,
            hurst_list: hurst_list.to_vec(),
            step_h: DEFAULT_STEP_H,
            count_n: DEFAULT_COUNT_N,
            replications: DEFAULT_REPLICATIONS,
            root_seed: DEFAULT_ROOT_SEED,
            sampler: SamplerKind::default(),
        }
        .try_into()
    }

    /// Parses JSON or TOML. The format follows the extension, else JSON is tried first.
    pub fn parse(text: &str, path_hint: Option<&Path>) -> Result<Self> {
        let ext = path_hint
            .and_then(|p| p.extension())
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        let from_json = |t: &str| serde_json::from_str::<ExperimentConfig>(t).map_err(|e| Error::Config(e.to_string()));
        let from_toml = |t: &str| toml::from_str::<ExperimentConfig>(t).map_err(|e| Error::Config(e.to_string()));
        match ext.as_deref() {
            Some("json") => from_json(text),
            Some("toml") => from_toml(text),
            _ => from_json(text).or_else(|je| from_toml(text).map_err(|_| je)),
        }
    }

    pub fn params(&self, hurst: HurstExponent) -> ModelParams {
        ModelParams {
            mu: self.mu,
            sigma_sq: self.sigma_sq,
            hurst,
        }
    }

    /// `2 (N-1) / N^2 * sigma^4`, the exact variance of the scale MLE.
    pub fn theoretical_var_sigma_sq(&self) -> f64 {
        let n = self.grid.len() as f64;
        2.0 * (n - 1.0) / (n * n) * self.sigma_sq * self.sigma_sq
    }
}

/// Per-replication estimates for one parameter cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicationSet {
    pub truth: ModelParams,
    pub grid: SamplingGrid,
    /// `t' Gamma^{-1} t`, fixed across replications.
    pub t_gi_t: f64,
    pub reports: Vec<EstimateReport>,
}

impl ReplicationSet {
    pub fn mu_hat(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.mu_hat).collect()
    }

    pub fn sigma_sq_hat(&self) -> Vec<f64> {
        self.reports.iter().map(|r| r.sigma_sq_hat).collect()
    }

    /// Standardized statistics; fails when the true scale is zero.
    pub fn standardized(&self) -> Result<Vec<StandardizedStats>> {
        self.reports
            .iter()
            .map(|r| standardized_stats(r, &self.truth, self.t_gi_t))
            .collect()
    }
}

/// Simulates `replications` paths of one cell and estimates each.
///
/// Replication `r` draws from `SimulationSeed::new(root_seed, r)`.
pub fn replicate(
    truth: &ModelParams,
    grid: &SamplingGrid,
    sampler: SamplerKind,
    replications: usize,
    root_seed: u64,
    exec: Execution,
) -> Result<ReplicationSet> {
    let cov = Arc::new(factorize(grid, truth.hurst)?);
    let sampler: Box<dyn FbmSampler> = match sampler {
        SamplerKind::Cholesky => Box::new(CholeskySampler::from_covariance(Arc::clone(&cov))),
        other => build_sampler(other, grid, truth.hurst)?,
    };
    let estimator = MleEstimator::new(cov)?;
    let reports = try_map_indexed(replications, exec, |r| {
        let path = sampler.sample(truth, SimulationSeed::new(root_seed, r as u64))?;
        estimator.estimate(&path)
    })
    .map_err(|(index, source)| Error::Replication {
        index,
        source: Box::new(source),
    })?;
    Ok(ReplicationSet {
        truth: *truth,
        grid: *grid,
        t_gi_t: estimator.t_gi_t(),
        reports,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstRecord {
    pub hurst: HurstExponent,
    pub mean_mu_hat: f64,
    pub sd_mu_hat: f64,
    pub mean_sigma_sq_hat: f64,
    pub sd_sigma_sq_hat: f64,
    /// KS p-value of `z_mu` against N(0,1); absent when `sigma_sq = 0` or too few replications.
    pub ks_p_z_mu: Option<f64>,
    /// KS p-value of `N sigma_sq_hat / sigma_sq` against chi-square(N-1).
    pub ks_p_chi_sq: Option<f64>,
    /// KS p-value of `z_sigma` against N(0,1).
    pub ks_p_z_sigma: Option<f64>,
    pub empirical_var_sigma_sq: f64,
    pub theoretical_var_sigma_sq: f64,
    /// `sqrt(sigma_sq / t' Gamma^{-1} t)`, the exact standard deviation of `mu_hat`.
    pub theoretical_sd_mu_hat: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub config: ExperimentConfig,
    pub records: Vec<HurstRecord>,
}

/// Mean and sample variance (divisor `n - 1`), shifted by the first value so a
/// constant input yields that constant and zero variance exactly.
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    let Some(&anchor) = xs.first() else {
        return (f64::NAN, f64::NAN);
    };
    let n = xs.len() as f64;
    let shift_mean = xs.iter().map(|x| x - anchor).sum::<f64>() / n;
    let mean = anchor + shift_mean;
    if xs.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

fn summarize(config: &ExperimentConfig, set: &ReplicationSet) -> Result<HurstRecord> {
    let mu_hat = set.mu_hat();
    let s2_hat = set.sigma_sq_hat();
    let (mean_mu_hat, var_mu) = mean_and_variance(&mu_hat);
    let (mean_sigma_sq_hat, var_s2) = mean_and_variance(&s2_hat);

    let (ks_p_z_mu, ks_p_chi_sq, ks_p_z_sigma) =
        if config.sigma_sq > 0.0 && set.reports.len() >= MIN_KS_SAMPLES {
            let stats = set.standardized()?;
            let z_mu: Vec<f64> = stats.iter().map(|s| s.z_mu).collect();
            let z_sigma: Vec<f64> = stats.iter().map(|s| s.z_sigma).collect();
            let chi: Vec<f64> = stats.iter().map(|s| s.chi_sq_stat).collect();
            (
                Some(ks_normality(&z_mu)?),
                Some(ks_chi_square(&chi, set.grid.len() - 1)?),
                Some(ks_normality(&z_sigma)?),
            )
        } else {
            (None, None, None)
        };

    Ok(HurstRecord {
        hurst: set.truth.hurst,
        mean_mu_hat,
        sd_mu_hat: var_mu.sqrt(),
        mean_sigma_sq_hat,
        sd_sigma_sq_hat: var_s2.sqrt(),
        ks_p_z_mu,
        ks_p_chi_sq,
        ks_p_z_sigma,
        empirical_var_sigma_sq: var_s2,
        theoretical_var_sigma_sq: config.theoretical_var_sigma_sq(),
        theoretical_sd_mu_hat: (config.sigma_sq / set.t_gi_t).sqrt(),
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentSummary> {
    run_experiment_with(config, Execution::default())
}

/// Runs every configured `H`. Output is identical for every [`Execution`].
pub fn run_experiment_with(config: &ExperimentConfig, exec: Execution) -> Result<ExperimentSummary> {
    let records = config
        .hurst_list
        .iter()
        .map(|&h| {
            let set = replicate(
                &config.params(h),
                &config.grid,
                config.sampler,
                config.replications,
                config.root_seed,
                exec,
            )?;
            summarize(config, &set)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ExperimentSummary {
        config: config.clone(),
        records,
    })
}
