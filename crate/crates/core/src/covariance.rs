//! Factorizations of `Gamma_H` and the quadratic forms the estimators are built from.
//!
//! Two backends share the [`Whitener`] interface: a dense Cholesky factor of
//! `Gamma_H` ([`FbmCovariance`]) and a Durbin–Levinson factor of the stationary
//! increment covariance ([`IncrementLevinson`]). Both expose a linear map `W`
//! with `W' W = Gamma_H^{-1}`, so every quadratic form `a' Gamma^{-1} b` is an
//! inner product of whitened vectors. The inverse is never formed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{dot, norm2, Matrix};
use crate::model::{build_gamma, fgn_autocovariance, HurstExponent, ObservationPath, SamplingGrid};

/// Relative Frobenius residual `||L L' - Gamma|| / ||Gamma||` a factorization must meet.
pub const FACTOR_RESIDUAL_TOL: f64 = 1e-10;
/// Relative residual `||Gamma x - b|| / ||b||` a solve must meet.
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-8;
/// Relative slack allowed in the Cauchy–Schwarz check on [`QuadraticForms`].
pub const CAUCHY_SCHWARZ_SLACK: f64 = 1e-9;

/// A factorization of `Gamma_H` usable for quadratic forms.
pub trait Whitener: Send + Sync {
    fn grid(&self) -> SamplingGrid;
    fn hurst(&self) -> HurstExponent;
    /// Applies `W` with `W' W = Gamma_H^{-1}`.
    fn whiten(&self, v: &[f64]) -> Result<Vec<f64>>;
    /// `log det Gamma_H`.
    fn log_det(&self) -> f64;
}

/// `t' Gamma^{-1} t`, `t' Gamma^{-1} Y` and `Y' Gamma^{-1} Y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticForms {
    pub t_gi_t: f64,
    pub t_gi_y: f64,
    pub y_gi_y: f64,
}

impl QuadraticForms {
    pub fn from_whitened(wt: &[f64], wy: &[f64]) -> Self {
        Self {
            t_gi_t: dot(wt, wt),
            t_gi_y: dot(wt, wy),
            y_gi_y: dot(wy, wy),
        }
    }

    /// Checks `t_gi_y^2 <= t_gi_t * y_gi_y` up to [`CAUCHY_SCHWARZ_SLACK`].
    pub fn satisfies_cauchy_schwarz(&self) -> bool {
        let lhs = self.t_gi_y * self.t_gi_y;
        let rhs = self.t_gi_t * self.y_gi_y;
        lhs <= rhs + CAUCHY_SCHWARZ_SLACK * rhs.max(lhs) + f64::MIN_POSITIVE
    }
}

/// `Gamma_H` on a grid together with its lower Cholesky factor.
#[derive(Debug, Clone)]
pub struct FbmCovariance {
    grid: SamplingGrid,
    hurst: HurstExponent,
    gamma: Matrix,
    chol_lower: Matrix,
}

impl FbmCovariance {
    pub fn gamma(&self) -> &Matrix {
        &self.gamma
    }

    pub fn chol_lower(&self) -> &Matrix {
        &self.chol_lower
    }

    /// Solves `L x = b`.
    pub fn forward_solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        check_len(self.grid.len(), b.len())?;
        Ok(forward_substitute(&self.chol_lower, b))
    }

    /// Solves `Gamma x = b` by two triangular solves.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let y = self.forward_solve(b)?;
        Ok(backward_substitute_transpose(&self.chol_lower, &y))
    }

    /// Computes `L z`, used to color standard normal draws.
    pub fn color(&self, z: &[f64]) -> Result<Vec<f64>> {
        check_len(self.grid.len(), z.len())?;
        let l = &self.chol_lower;
        Ok((0..z.len())
            .map(|i| dot(&l.row(i)[..=i], &z[..=i]))
            .collect())
    }

    /// The three quadratic forms for an observation path on this grid.
    pub fn quad_forms(&self, y: &ObservationPath) -> Result<QuadraticForms> {
        quad_forms(self, y)
    }

    pub fn log_det(&self) -> f64 {
        2.0 * (0..self.grid.len())
            .map(|i| self.chol_lower[(i, i)].ln())
            .sum::<f64>()
    }

    /// `||L L' - Gamma||_F / ||Gamma||_F`.
    pub fn factor_residual(&self) -> f64 {
        let llt = self.chol_lower.mul(&self.chol_lower.transpose());
        llt.frobenius_distance(&self.gamma) / self.gamma.frobenius_norm()
    }
}

impl Whitener for FbmCovariance {
    fn grid(&self) -> SamplingGrid {
        self.grid
    }

    fn hurst(&self) -> HurstExponent {
        self.hurst
    }

    fn whiten(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.forward_solve(v)
    }

    fn log_det(&self) -> f64 {
        FbmCovariance::log_det(self)
    }
}

impl<W: Whitener + ?Sized> Whitener for std::sync::Arc<W> {
    fn grid(&self) -> SamplingGrid {
        (**self).grid()
    }

    fn hurst(&self) -> HurstExponent {
        (**self).hurst()
    }

    fn whiten(&self, v: &[f64]) -> Result<Vec<f64>> {
        (**self).whiten(v)
    }

    fn log_det(&self) -> f64 {
        (**self).log_det()
    }
}

/// Builds `Gamma_H` and its Cholesky factor.
pub fn factorize(grid: &SamplingGrid, hurst: HurstExponent) -> Result<FbmCovariance> {
    let gamma = build_gamma(grid, hurst);
    let chol_lower = cholesky(&gamma)?;
    Ok(FbmCovariance {
        grid: *grid,
        hurst,
        gamma,
        chol_lower,
    })
}

/// Lower Cholesky factor of a symmetric matrix. Fails on the first non-positive pivot.
pub fn cholesky(a: &Matrix) -> Result<Matrix> {
    let n = a.dim();
    let mut l = Matrix::zeros(n);
    for i in 0..n {
        for j in 0..=i {
            let s = dot(&l.row(i)[..j], &l.row(j)[..j]);
            if i == j {
                let pivot = a[(i, i)] - s;
                if !(pivot > 0.0) || !pivot.is_finite() {
                    return Err(Error::NotPositiveDefinite { index: i, pivot });
                }
                l[(i, i)] = pivot.sqrt();
            } else {
                l[(i, j)] = (a[(i, j)] - s) / l[(j, j)];
            }
        }
    }
    Ok(l)
}

fn forward_substitute(l: &Matrix, b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut x = vec![0.0; n];
    for i in 0..n {
        let s = dot(&l.row(i)[..i], &x[..i]);
        x[i] = (b[i] - s) / l[(i, i)];
    }
    x
}

fn backward_substitute_transpose(l: &Matrix, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut x = y.to_vec();
    for i in (0..n).rev() {
        x[i] /= l[(i, i)];
        let xi = x[i];
        // column i of L is row i of L'
        for k in 0..i {
            x[k] -= l[(i, k)] * xi;
        }
    }
    x
}

fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, actual })
    }
}

/// Quadratic forms of `y` under any [`Whitener`].
pub fn quad_forms<W: Whitener + ?Sized>(cov: &W, y: &ObservationPath) -> Result<QuadraticForms> {
    if y.grid() != cov.grid() {
        return Err(Error::GridMismatch);
    }
    let wt = cov.whiten(&cov.grid().times())?;
    let wy = cov.whiten(y.values())?;
    Ok(QuadraticForms::from_whitened(&wt, &wy))
}

/// Upper bound on the largest eigenvalue of `Gamma_H`: the maximum absolute row sum.
pub fn gerschgorin_bound(grid: &SamplingGrid, hurst: HurstExponent) -> f64 {
    // Entries of Gamma_H are non-negative, so absolute row sums are plain row sums.
    build_gamma(grid, hurst).max_abs_row_sum()
}

/// Relative residual `||Gamma x - b|| / ||b||` (zero when `b = 0` and `x = 0`).
pub fn solve_residual(gamma: &Matrix, x: &[f64], b: &[f64]) -> f64 {
    let gx = gamma.mul_vec(x);
    let r: Vec<f64> = gx.iter().zip(b).map(|(a, c)| a - c).collect();
    let nb = norm2(b);
    if nb == 0.0 {
        norm2(&r)
    } else {
        norm2(&r) / nb
    }
}

/// Factorization through the stationary increments of `B^H`.
///
/// With `D` the first-difference matrix (`B_0 = 0`), `D Gamma_H D' = h^{2H} T`
/// where `T` is the Toeplitz fGn autocovariance. The Durbin–Levinson recursion
/// yields `T^{-1} = A' V^{-1} A` in `O(N^2)`, so `W = V^{-1/2} A D / h^H`.
#[derive(Debug, Clone)]
pub struct IncrementLevinson {
    grid: SamplingGrid,
    hurst: HurstExponent,
    /// Row `k` (0-based) holds the order-`k` prediction coefficients `phi_{k,1..=k}`.
    coeffs: Vec<f64>,
    /// One-step prediction variances `P_0..P_{N-1}` of unit-step fGn.
    pred_var: Vec<f64>,
}

impl IncrementLevinson {
    pub fn new(grid: &SamplingGrid, hurst: HurstExponent) -> Result<Self> {
        let n = grid.len();
        let acov: Vec<f64> = (0..n).map(|k| fgn_autocovariance(k, hurst)).collect();
        let mut coeffs = Vec::with_capacity(n * (n - 1) / 2);
        let mut pred_var = Vec::with_capacity(n);
        let mut prev: Vec<f64> = Vec::new();
        let mut p = acov[0];
        pred_var.push(p);
        for k in 1..n {
            let s: f64 = prev
                .iter()
                .enumerate()
                .map(|(j, phi)| phi * acov[k - 1 - j])
                .sum();
            let reflection = (acov[k] - s) / p;
            let mut next = Vec::with_capacity(k);
            for j in 0..k - 1 {
                next.push(prev[j] - reflection * prev[k - 2 - j]);
            }
            next.push(reflection);
            p *= 1.0 - reflection * reflection;
            if !(p > 0.0) {
                return Err(Error::NotPositiveDefinite { index: k, pivot: p });
            }
            coeffs.extend_from_slice(&prev);
            pred_var.push(p);
            prev = next;
        }
        coeffs.extend_from_slice(&prev);
        Ok(Self {
            grid: *grid,
            hurst,
            coeffs,
            pred_var,
        })
    }

    fn order_coeffs(&self, k: usize) -> &[f64] {
        let start = k * (k.saturating_sub(1)) / 2;
        &self.coeffs[start..start + k]
    }
}

impl Whitener for IncrementLevinson {
    fn grid(&self) -> SamplingGrid {
        self.grid
    }

    fn hurst(&self) -> HurstExponent {
        self.hurst
    }

    fn whiten(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.grid.len();
        check_len(n, v.len())?;
        let scale = self.grid.step().powf(self.hurst.value());
        let x: Vec<f64> = (0..n)
            .map(|i| if i == 0 { v[0] } else { v[i] - v[i - 1] })
            .collect();
        Ok((0..n)
            .map(|k| {
                let phi = self.order_coeffs(k);
                let pred: f64 = phi.iter().enumerate().map(|(j, c)| c * x[k - 1 - j]).sum();
                (x[k] - pred) / (scale * self.pred_var[k].sqrt())
            })
            .collect())
    }

    fn log_det(&self) -> f64 {
        let n = self.grid.len() as f64;
        n * self.hurst.twice() * self.grid.step().ln() + self.pred_var.iter().map(|p| p.ln()).sum::<f64>()
    }
}
