//! Exact sample paths of `Y_t = mu t + sigma B^H_t` on a uniform grid.
//!
//! Two independent exact samplers are provided: coloring i.i.d. normals with
//! the Cholesky factor of `Gamma_H`, and Davies–Harte circulant embedding of
//! fractional Gaussian noise followed by a cumulative sum.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::covariance::{factorize, FbmCovariance};
use crate::error::{Error, Result};
use crate::model::{fgn_autocovariance, HurstExponent, ModelParams, ObservationPath, SamplingGrid};

/// Identifies one reproducible random stream.
///
/// The stream is a ChaCha8 generator keyed by `root_seed` and positioned on
/// stream number `replication_index`, so distinct indices never overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SimulationSeed {
    pub root_seed: u64,
    pub replication_index: u64,
}

impl SimulationSeed {
    pub fn new(root_seed: u64, replication_index: u64) -> Self {
        Self {
            root_seed,
            replication_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.root_seed);
        rng.set_stream(self.replication_index);
        rng
    }
}

/// `count` i.i.d. standard normal deviates from the stream named by `seed`.
pub fn normal_stream(seed: SimulationSeed, count: usize) -> Vec<f64> {
    let mut rng = seed.rng();
    (0..count).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    #[default]
    Cholesky,
    DaviesHarte,
}

impl std::str::FromStr for SamplerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cholesky" => Ok(Self::Cholesky),
            "davies_harte" | "davies-harte" => Ok(Self::DaviesHarte),
            other => Err(Error::InvalidParameter(format!(
                "unknown sampler {other:?} (expected cholesky or davies_harte)"
            ))),
        }
    }
}

impl std::fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Cholesky => "cholesky",
            Self::DaviesHarte => "davies_harte",
        })
    }
}

/// Draws zero-drift, unit-scale fBm vectors `(B^H_h, ..., B^H_{Nh})`.
pub trait FbmSampler: Send + Sync {
    fn grid(&self) -> SamplingGrid;
    fn hurst(&self) -> HurstExponent;
    fn sample_fbm(&self, seed: SimulationSeed) -> Vec<f64>;

    /// Adds drift and scale: `Y = mu t + sigma B`.
    fn sample(&self, params: &ModelParams, seed: SimulationSeed) -> Result<ObservationPath> {
        if params.hurst != self.hurst() {
            return Err(Error::InvalidParameter(format!(
                "sampler built for H={} but params have H={}",
                self.hurst(),
                params.hurst
            )));
        }
        let grid = self.grid();
        let values = if params.sigma_sq == 0.0 {
            grid.times().into_iter().map(|t| params.mu * t).collect()
        } else {
            let sigma = params.sigma();
            self.sample_fbm(seed)
                .into_iter()
                .enumerate()
                .map(|(k, b)| params.mu * grid.time(k + 1) + sigma * b)
                .collect()
        };
        ObservationPath::new(grid, values)
    }
}

/// Builds the sampler of the requested kind.
pub fn build_sampler(
    kind: SamplerKind,
    grid: &SamplingGrid,
    hurst: HurstExponent,
) -> Result<Box<dyn FbmSampler>> {
    Ok(match kind {
        SamplerKind::Cholesky => Box::new(CholeskySampler::new(grid, hurst)?),
        SamplerKind::DaviesHarte => Box::new(DaviesHarteSampler::new(grid, hurst)?),
    })
}

#[derive(Debug, Clone)]
pub struct CholeskySampler {
    cov: Arc<FbmCovariance>,
}

impl CholeskySampler {
    pub fn new(grid: &SamplingGrid, hurst: HurstExponent) -> Result<Self> {
        Ok(Self {
            cov: Arc::new(factorize(grid, hurst)?),
        })
    }

    pub fn from_covariance(cov: Arc<FbmCovariance>) -> Self {
        Self { cov }
    }
}

impl FbmSampler for CholeskySampler {
    fn grid(&self) -> SamplingGrid {
        crate::covariance::Whitener::grid(&*self.cov)
    }

    fn hurst(&self) -> HurstExponent {
        crate::covariance::Whitener::hurst(&*self.cov)
    }

    fn sample_fbm(&self, seed: SimulationSeed) -> Vec<f64> {
        let z = normal_stream(seed, self.grid().len());
        self.cov.color(&z).expect("normal draw length matches grid")
    }
}

/// Circulant embedding of unit-step fGn.
///
/// The fGn autocovariance is embedded in a circulant of size `M`, the next
/// power of two at or above `2(N-1)`, with first row `gamma(min(k, M-k))`. A
/// complex Gaussian vector scaled by `sqrt(lambda_k / M)` and transformed by
/// the DFT has real part with exactly the circulant covariance; its first `N`
/// entries are the increments.
pub struct DaviesHarteSampler {
    grid: SamplingGrid,
    hurst: HurstExponent,
    amplitude: Vec<f64>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for DaviesHarteSampler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DaviesHarteSampler")
            .field("grid", &self.grid)
            .field("hurst", &self.hurst)
            .field("embedding", &self.amplitude.len())
            .finish()
    }
}

/// Eigenvalues this far below zero (relative to the largest) are rounding noise.
const EIGEN_ROUNDING_TOL: f64 = 1e-10;

impl DaviesHarteSampler {
    pub fn new(grid: &SamplingGrid, hurst: HurstExponent) -> Result<Self> {
        let n = grid.len();
        let m = (2 * (n - 1)).next_power_of_two().max(2);
        let mut row: Vec<Complex64> = (0..m)
            .map(|k| Complex64::new(fgn_autocovariance(k.min(m - k), hurst), 0.0))
            .collect();
        let fft = FftPlanner::new().plan_fft_forward(m);
        fft.process(&mut row);
        let lambda_max = row.iter().map(|c| c.re).fold(0.0, f64::max);
        let mut amplitude = Vec::with_capacity(m);
        for (index, c) in row.iter().enumerate() {
            let value = c.re;
            if value < 0.0 {
                if value < -EIGEN_ROUNDING_TOL * lambda_max {
                    return Err(Error::NegativeEigenvalue { index, value });
                }
                amplitude.push(0.0);
            } else {
                amplitude.push((value / m as f64).sqrt());
            }
        }
        Ok(Self {
            grid: *grid,
            hurst,
            amplitude,
            fft,
        })
    }

    pub fn embedding_len(&self) -> usize {
        self.amplitude.len()
    }

    /// Unit-step fGn increments.
    pub fn sample_increments(&self, seed: SimulationSeed) -> Vec<f64> {
        let m = self.amplitude.len();
        let z = normal_stream(seed, 2 * m);
        let mut buf: Vec<Complex64> = self
            .amplitude
            .iter()
            .enumerate()
            .map(|(k, a)| Complex64::new(a * z[2 * k], a * z[2 * k + 1]))
            .collect();
        self.fft.process(&mut buf);
        buf.iter().take(self.grid.len()).map(|c| c.re).collect()
    }
}

impl FbmSampler for DaviesHarteSampler {
    fn grid(&self) -> SamplingGrid {
        self.grid
    }

    fn hurst(&self) -> HurstExponent {
        self.hurst
    }

    fn sample_fbm(&self, seed: SimulationSeed) -> Vec<f64> {
        let scale = self.grid.step().powf(self.hurst.value());
        let mut acc = 0.0;
        self.sample_increments(seed)
            .into_iter()
            .map(|x| {
                acc += x;
                scale * acc
            })
            .collect()
    }
}

pub fn sample_cholesky(
    params: &ModelParams,
    grid: &SamplingGrid,
    seed: SimulationSeed,
) -> Result<ObservationPath> {
    CholeskySampler::new(grid, params.hurst)?.sample(params, seed)
}

pub fn sample_davies_harte(
    params: &ModelParams,
    grid: &SamplingGrid,
    seed: SimulationSeed,
) -> Result<ObservationPath> {
    DaviesHarteSampler::new(grid, params.hurst)?.sample(params, seed)
}
