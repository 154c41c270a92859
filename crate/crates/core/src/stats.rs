//! Per-step increment statistics and Monte-Carlo comparisons between a
//! training dataset and emulated paths.

use crate::dataset::TrajectoryDataset;
use crate::matrix::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: Vec<f64>,
    /// Unbiased sample covariance (zero when `count < 2`).
    pub cov: Matrix,
}

pub fn moments(samples: &[Vec<f64>]) -> Moments {
    let count = samples.len();
    let n = samples.first().map_or(0, Vec::len);
    let mut mean = vec![0.0; n];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s) {
            *m += v / count as f64;
        }
    }
    let mut cov = Matrix::zeros(n.max(1), n.max(1));
    if count >= 2 {
        for s in samples {
            for i in 0..n {
                for j in 0..n {
                    cov[(i, j)] += (s[i] - mean[i]) * (s[j] - mean[j]) / (count - 1) as f64;
                }
            }
        }
    }
    Moments { count, mean, cov }
}

/// Moments of the increments across trials, one entry per step.
pub fn step_moments(dataset: &TrajectoryDataset) -> Vec<Moments> {
    (0..dataset.steps())
        .map(|k| {
            let inc: Vec<Vec<f64>> = dataset.increments(k).into_iter().map(|(dx, _)| dx).collect();
            moments(&inc)
        })
        .collect()
}

/// Pooled covariance of all increments around their per-step means.
pub fn pooled_increment_covariance(dataset: &TrajectoryDataset) -> Matrix {
    let per_step = step_moments(dataset);
    let n = dataset.dim();
    let mut acc = Matrix::zeros(n, n);
    for m in &per_step {
        acc = acc.add(&m.cov).expect("same dimension");
    }
    acc.scale(1.0 / per_step.len() as f64)
}

/// Largest standardized discrepancies between two sets of moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Discrepancy {
    /// Max over components of |Δmean| / standard error.
    pub mean_z: f64,
    /// Max over entries of |Δcov| / standard error.
    pub cov_z: f64,
}

impl Discrepancy {
    pub fn within(&self, z: f64) -> bool {
        self.mean_z <= z && self.cov_z <= z
    }
}

fn zscore(diff: f64, var: f64) -> f64 {
    if diff == 0.0 {
        0.0
    } else if var <= 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / var.sqrt()
    }
}

/// Standard errors use `σᵢᵢ/n` for means and the Gaussian approximation
/// `(σᵢᵢσⱼⱼ + σᵢⱼ²)/(n−1)` for covariance entries.
pub fn discrepancy(a: &Moments, b: &Moments) -> Discrepancy {
    let n = a.mean.len();
    let (na, nb) = (a.count as f64, b.count as f64);
    let mut mean_z: f64 = 0.0;
    let mut cov_z: f64 = 0.0;
    for i in 0..n {
        let var = a.cov[(i, i)] / na + b.cov[(i, i)] / nb;
        mean_z = mean_z.max(zscore(a.mean[i] - b.mean[i], var));
        for j in 0..n {
            let va = (a.cov[(i, i)] * a.cov[(j, j)] + a.cov[(i, j)].powi(2)) / (na - 1.0).max(1.0);
            let vb = (b.cov[(i, i)] * b.cov[(j, j)] + b.cov[(i, j)].powi(2)) / (nb - 1.0).max(1.0);
            cov_z = cov_z.max(zscore(a.cov[(i, j)] - b.cov[(i, j)], va + vb));
        }
    }
    Discrepancy { mean_z, cov_z }
}
