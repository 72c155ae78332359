//! Closed-form maximum-likelihood estimators of drift and scale, with known `H`.
//!
//! With `W' W = Gamma_H^{-1}`, `w = W t` and `u = W Y`:
//!
//! * `mu_hat = (w . u) / (w . w)`
//! * `sigma_sq_hat = (|u|^2 |w|^2 - (w . u)^2) / (N |w|^2)`, evaluated as
//!   `|u - mu_hat w|^2 / N`, the squared residual after projecting out the drift.

use serde::{Deserialize, Serialize};

use crate::covariance::{factorize, QuadraticForms, Whitener};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::model::{HurstExponent, ModelParams, ObservationPath};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mu_hat: f64,
    /// The MLE, biased by `(N-1)/N`.
    pub sigma_sq_hat: f64,
    /// `N/(N-1) * sigma_sq_hat`.
    pub sigma_sq_unbiased: f64,
    /// `sqrt(sigma_sq / t' Gamma^{-1} t)`; plug-in with `sigma_sq_unbiased` unless the
    /// true scale was supplied.
    pub se_mu_exact: f64,
    pub n: usize,
    pub hurst: HurstExponent,
}

impl EstimateReport {
    /// Recomputes the standard error of `mu_hat` with a known scale.
    pub fn with_true_sigma_sq(mut self, sigma_sq: f64, t_gi_t: f64) -> Self {
        self.se_mu_exact = (sigma_sq / t_gi_t).sqrt();
        self
    }
}

/// Statistics whose laws are known: `z_mu ~ N(0,1)` exactly, `z_sigma -> N(0,1)`
/// and `chi_sq_stat ~ chi^2(N-1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedStats {
    pub z_mu: f64,
    pub z_sigma: f64,
    pub chi_sq_stat: f64,
}

/// An estimator bound to one grid and `H`; reusable across many paths.
pub struct MleEstimator<W> {
    whitener: W,
    whitened_t: Vec<f64>,
    t_gi_t: f64,
}

impl<W: Whitener> MleEstimator<W> {
    pub fn new(whitener: W) -> Result<Self> {
        let whitened_t = whitener.whiten(&whitener.grid().times())?;
        let t_gi_t = dot(&whitened_t, &whitened_t);
        Ok(Self {
            whitener,
            whitened_t,
            t_gi_t,
        })
    }

    pub fn whitener(&self) -> &W {
        &self.whitener
    }

    /// `t' Gamma^{-1} t`.
    pub fn t_gi_t(&self) -> f64 {
        self.t_gi_t
    }

    pub fn estimate(&self, y: &ObservationPath) -> Result<EstimateReport> {
        self.estimate_with_forms(y).map(|(r, _)| r)
    }

    pub fn estimate_with_forms(&self, y: &ObservationPath) -> Result<(EstimateReport, QuadraticForms)> {
        let grid = self.whitener.grid();
        if y.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let u = self.whitener.whiten(y.values())?;
        let forms = QuadraticForms::from_whitened(&self.whitened_t, &u);
        let mu_hat = forms.t_gi_y / forms.t_gi_t;
        let residual: f64 = u
            .iter()
            .zip(&self.whitened_t)
            .map(|(a, w)| {
                let r = a - mu_hat * w;
                r * r
            })
            .sum();
        let n = grid.len();
        let nf = n as f64;
        let sigma_sq_hat = residual / nf;
        let sigma_sq_unbiased = sigma_sq_hat * nf / (nf - 1.0);
        let report = EstimateReport {
            mu_hat,
            sigma_sq_hat,
            sigma_sq_unbiased,
            se_mu_exact: (sigma_sq_unbiased / forms.t_gi_t).sqrt(),
            n,
            hurst: self.whitener.hurst(),
        };
        Ok((report, forms))
    }

    /// Gaussian log-density of `y` under `params`.
    pub fn log_likelihood(&self, y: &ObservationPath, params: &ModelParams) -> Result<f64> {
        if !(params.sigma_sq > 0.0) {
            return Err(Error::Domain(format!(
                "log-likelihood needs sigma_sq > 0, got {}",
                params.sigma_sq
            )));
        }
        if y.grid() != self.whitener.grid() {
            return Err(Error::GridMismatch);
        }
        let u = self.whitener.whiten(y.values())?;
        let q: f64 = u
            .iter()
            .zip(&self.whitened_t)
            .map(|(a, w)| {
                let r = a - params.mu * w;
                r * r
            })
            .sum();
        let nf = y.values().len() as f64;
        Ok(-0.5 * nf * (2.0 * std::f64::consts::PI * params.sigma_sq).ln()
            - 0.5 * self.whitener.log_det()
            - q / (2.0 * params.sigma_sq))
    }
}

/// Estimates `(mu, sigma^2)` from one path with a dense Cholesky factorization.
pub fn estimate(y: &ObservationPath, hurst: HurstExponent) -> Result<EstimateReport> {
    MleEstimator::new(factorize(&y.grid(), hurst)?)?.estimate(y)
}

pub fn log_likelihood(y: &ObservationPath, params: &ModelParams) -> Result<f64> {
    MleEstimator::new(factorize(&y.grid(), params.hurst)?)?.log_likelihood(y, params)
}

pub fn standardized_stats(
    report: &EstimateReport,
    truth: &ModelParams,
    t_gi_t: f64,
) -> Result<StandardizedStats> {
    if !(truth.sigma_sq > 0.0) {
        return Err(Error::Domain(format!(
            "standardized statistics need a positive true sigma_sq, got {}",
            truth.sigma_sq
        )));
    }
    let nf = report.n as f64;
    Ok(StandardizedStats {
        z_mu: t_gi_t.sqrt() * (report.mu_hat - truth.mu) / truth.sigma(),
        z_sigma: (nf / 2.0).sqrt() * (report.sigma_sq_hat - truth.sigma_sq) / truth.sigma_sq,
        chi_sq_stat: nf * report.sigma_sq_hat / truth.sigma_sq,
    })
}
