//! Rate distortion function of a memoryless Gaussian source under
//! mean-square distortion, by reverse water-filling over the eigenmodes of
//! its covariance.

use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::matrix::{logdet_psd, sym_eig, Matrix};

/// Eigenvalues down to this much below zero are treated as rounding noise.
pub const PSD_TOL: f64 = 1e-9;
/// Modes smaller than this fraction of the largest one carry no rate.
pub const ZERO_MODE_REL: f64 = 1e-12;
/// Bisection on the water level stops at this fraction of `max(1, tr Σ)`.
pub const WATER_LEVEL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct GaussianSource {
    mean: Vec<f64>,
    covariance: Matrix,
    variances: Vec<f64>,
}

impl GaussianSource {
    pub fn new(mean: Vec<f64>, covariance: Matrix) -> Result<Self> {
        let n = covariance.rows();
        if !covariance.is_square() {
            return Err(Error::Dimension("covariance must be square".into()));
        }
        if mean.len() != n {
            return Err(Error::Dimension(format!(
                "mean has length {}, covariance is {n}x{n}",
                mean.len()
            )));
        }
        if mean.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("mean must be finite".into()));
        }
        let eig = sym_eig(&covariance)?;
        let top = eig.values.first().copied().unwrap_or(0.0).abs();
        if eig.values.iter().any(|&v| v < -PSD_TOL * top.max(1.0)) {
            return Err(Error::Input("covariance is not positive semidefinite".into()));
        }
        let top = eig.values[0].max(0.0);
        let variances = eig
            .values
            .iter()
            .map(|&v| if v < ZERO_MODE_REL * top { 0.0 } else { v })
            .collect();
        Ok(GaussianSource { mean, covariance: covariance.symmetrize(), variances })
    }

    /// Zero-mean source with covariance `cov`.
    pub fn centered(cov: Matrix) -> Result<Self> {
        let n = cov.rows();
        GaussianSource::new(vec![0.0; n], cov)
    }

    pub fn dim(&self) -> usize {
        self.variances.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &Matrix {
        &self.covariance
    }

    /// Principal variances σᵢ², descending, with numerically-zero modes set to 0.
    pub fn variances(&self) -> &[f64] {
        &self.variances
    }

    pub fn total_variance(&self) -> f64 {
        self.variances.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RdfResult {
    pub rate_nats: f64,
    pub rate_bits: f64,
    /// Water level θ.
    pub water_level: f64,
    /// Per-mode distortions `min(θ, σᵢ²)`, aligned with `variances`.
    pub allocations: Vec<f64>,
    pub variances: Vec<f64>,
}

impl RdfResult {
    fn from_allocations(variances: Vec<f64>, allocations: Vec<f64>, water_level: f64) -> Self {
        let rate_nats = 0.5
            * variances
                .iter()
                .zip(&allocations)
                .filter(|(&s, _)| s > 0.0)
                .map(|(&s, &d)| (s / d).ln().max(0.0))
                .sum::<f64>();
        RdfResult { rate_nats, rate_bits: rate_nats / LN_2, water_level, allocations, variances }
    }
}

/// R(D) by reverse water-filling.
///
/// With `D = 0` and a nondegenerate mode the rate is `+∞`.
pub fn rdf(source: &GaussianSource, distortion: f64) -> Result<RdfResult> {
    if !(distortion >= 0.0) || !distortion.is_finite() {
        return Err(Error::Input(format!("distortion must be finite and >= 0, got {distortion}")));
    }
    let sig = source.variances().to_vec();
    let total = source.total_variance();
    let top = sig.first().copied().unwrap_or(0.0);
    if distortion >= total {
        return Ok(RdfResult::from_allocations(sig.clone(), sig, top));
    }

    let filled = |theta: f64| sig.iter().map(|&s| s.min(theta)).sum::<f64>();
    let (mut lo, mut hi) = (0.0, top);
    let tol = WATER_LEVEL_TOL * total.max(1.0);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if filled(mid) < distortion {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // settle θ on the linear piece the bracket landed on
    let theta_est = 0.5 * (lo + hi);
    let (below, active): (Vec<f64>, Vec<f64>) = sig.iter().partition(|&&s| s <= theta_est);
    let theta = if active.is_empty() {
        theta_est
    } else {
        let exact = (distortion - below.iter().sum::<f64>()) / active.len() as f64;
        let floor = below.iter().copied().fold(0.0, f64::max);
        let ceil = active.iter().copied().fold(f64::INFINITY, f64::min);
        if exact >= floor && exact <= ceil {
            exact
        } else {
            theta_est
        }
    };
    let allocations = sig.iter().map(|&s| s.min(theta)).collect();
    Ok(RdfResult::from_allocations(sig, allocations, theta))
}

/// `½ ln det Σ − (n/2) ln(D/n)`, valid only when `D/n < min σᵢ²`.
pub fn rdf_logdet_fastpath(source: &GaussianSource, distortion: f64) -> Result<f64> {
    let n = source.dim() as f64;
    let smallest = source.variances().last().copied().unwrap_or(0.0);
    if !(distortion > 0.0) || !(distortion / n < smallest) {
        return Err(Error::Domain(format!(
            "need 0 < D/n < min eigenvalue ({smallest}), got D/n = {}",
            distortion / n
        )));
    }
    let logdet = logdet_psd(source.covariance())?;
    Ok(0.5 * logdet - 0.5 * n * (distortion / n).ln())
}
