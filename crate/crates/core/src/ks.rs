//! One-sample Kolmogorov–Smirnov tests with asymptotic p-values.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::{Error, Result};

pub const MIN_KS_SAMPLES: usize = 100;

/// `sup_x |F_n(x) - F(x)|` for a continuous reference CDF.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            let lo = f - i as f64 / n;
            let hi = (i + 1) as f64 / n - f;
            lo.max(hi)
        })
        .fold(0.0, f64::max)
}

/// Survival function of the Kolmogorov distribution, `P(K > lambda)`.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 1.0 {
        // P(K <= x) = sqrt(2 pi)/x * sum_k exp(-(2k-1)^2 pi^2 / (8 x^2)), fast for small x
        let pi2 = std::f64::consts::PI * std::f64::consts::PI;
        let c = -pi2 / (8.0 * lambda * lambda);
        let cdf: f64 = (1..=20)
            .map(|k| {
                let m = (2 * k - 1) as f64;
                (c * m * m).exp()
            })
            .sum::<f64>()
            * (2.0 * std::f64::consts::PI).sqrt()
            / lambda;
        return (1.0 - cdf).clamp(0.0, 1.0);
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-18 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// Asymptotic p-value of the one-sample KS test against `cdf`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    if samples.len() < MIN_KS_SAMPLES {
        return Err(Error::TooFewSamples {
            needed: MIN_KS_SAMPLES,
            actual: samples.len(),
        });
    }
    let d = ks_statistic(samples, cdf);
    Ok(kolmogorov_survival((samples.len() as f64).sqrt() * d))
}

/// KS p-value against the standard normal.
pub fn ks_normality(samples: &[f64]) -> Result<f64> {
    let normal = Normal::standard();
    ks_test(samples, |x| normal.cdf(x))
}

/// KS p-value against chi-square with `dof` degrees of freedom.
pub fn ks_chi_square(samples: &[f64], dof: usize) -> Result<f64> {
    if dof < 1 {
        return Err(Error::Domain("chi-square needs at least 1 degree of freedom".into()));
    }
    let chi = ChiSquared::new(dof as f64).map_err(|e| Error::Domain(e.to_string()))?;
    ks_test(samples, |x| chi.cdf(x))
}
