//! The drift fractional Brownian motion model `Y_t = mu * t + sigma * B^H_t`
//! observed on a uniform grid, and the exact covariance of `B^H` on that grid.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Matrix;

/// Memory parameter of fractional Brownian motion, restricted to `(0, 1)`.
///
/// `H = 0.5` is accepted; it reduces every formula to the standard Brownian case.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct HurstExponent(f64);

impl HurstExponent {
    pub fn new(value: f64) -> Result<Self> {
        if value > 0.0 && value < 1.0 {
            Ok(Self(value))
        } else {
            Err(Error::InvalidHurst(value))
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `2H`, the exponent that appears in every covariance entry.
    #[inline]
    pub fn twice(self) -> f64 {
        2.0 * self.0
    }
}

impl TryFrom<f64> for HurstExponent {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<HurstExponent> for f64 {
    fn from(h: HurstExponent) -> f64 {
        h.0
    }
}

impl std::fmt::Display for HurstExponent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Observation times `t_k = k * step_h` for `k = 1..=count_n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplingGrid {
    step_h: f64,
    count_n: usize,
}

impl SamplingGrid {
    /// At least two observations are required; with one, the scale estimate has
    /// no degrees of freedom left after the drift is projected out.
    pub fn new(step_h: f64, count_n: usize) -> Result<Self> {
        if !(step_h.is_finite() && step_h > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "step must be finite and positive, got {step_h}"
            )));
        }
        if count_n < 2 {
            return Err(Error::InvalidGrid(format!(
                "need at least 2 observations, got {count_n}"
            )));
        }
        Ok(Self { step_h, count_n })
    }

    #[inline]
    pub fn step(&self) -> f64 {
        self.step_h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.count_n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Time of the `k`-th observation, 1-based.
    #[inline]
    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.step_h
    }

    /// The vector `t = (h, 2h, ..., Nh)`.
    pub fn times(&self) -> Vec<f64> {
        (1..=self.count_n).map(|k| self.time(k)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub mu: f64,
    pub sigma_sq: f64,
    pub hurst: HurstExponent,
}

impl ModelParams {
    pub fn new(mu: f64, sigma_sq: f64, hurst: HurstExponent) -> Result<Self> {
        if !mu.is_finite() {
            return Err(Error::InvalidParameter(format!("mu must be finite, got {mu}")));
        }
        if !(sigma_sq.is_finite() && sigma_sq >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sigma_sq must be finite and non-negative, got {sigma_sq}"
            )));
        }
        Ok(Self { mu, sigma_sq, hurst })
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma_sq.sqrt()
    }
}

/// The observation vector `Y = (Y_{t_1}, ..., Y_{t_N})`.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationPath {
    grid: SamplingGrid,
    values: Vec<f64>,
}

impl ObservationPath {
    pub fn new(grid: SamplingGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::DimensionMismatch {
                expected: grid.len(),
                actual: values.len(),
            });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "observation {} is not finite",
                k + 1
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> SamplingGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// `E[B^H_s B^H_t] = (t^{2H} + s^{2H} - |t - s|^{2H}) / 2`.
pub fn fbm_cov(s: f64, t: f64, hurst: HurstExponent) -> Result<f64> {
    if s < 0.0 || t < 0.0 || s.is_nan() || t.is_nan() {
        return Err(Error::Domain(format!(
            "fBm covariance needs non-negative times, got s={s}, t={t}"
        )));
    }
    let a = hurst.twice();
    Ok(0.5 * (t.powf(a) + s.powf(a) - (t - s).abs().powf(a)))
}

/// Covariance matrix `Gamma_H` of `(B^H_h, ..., B^H_{Nh})`.
///
/// Entries are `h^{2H} m_ij` with `m_ij = ((i^{2H} - |i-j|^{2H}) + j^{2H}) / 2`,
/// filled from the lower triangle so the result is exactly symmetric.
pub fn build_gamma(grid: &SamplingGrid, hurst: HurstExponent) -> Matrix {
    let scale = grid.step().powf(hurst.twice());
    unit_gamma(grid.len(), hurst).scale(scale)
}

/// The unit-step matrix `M` with `Gamma_H(h) = h^{2H} M`.
pub fn unit_gamma(n: usize, hurst: HurstExponent) -> Matrix {
    let a = hurst.twice();
    let pow: Vec<f64> = (0..=n).map(|k| (k as f64).powf(a)).collect();
    let mut m = Matrix::zeros(n);
    for i in 1..=n {
        for j in 1..=i {
            let v = 0.5 * ((pow[i] - pow[i - j]) + pow[j]);
            m[(i - 1, j - 1)] = v;
            m[(j - 1, i - 1)] = v;
        }
    }
    m
}

/// Autocovariance of unit-step fractional Gaussian noise,
/// `gamma(k) = (|k+1|^{2H} - 2 k^{2H} + |k-1|^{2H}) / 2`.
pub fn fgn_autocovariance(k: usize, hurst: HurstExponent) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let a = hurst.twice();
    let k = k as f64;
    0.5 * ((k + 1.0).powf(a) - 2.0 * k.powf(a) + (k - 1.0).powf(a))
}
