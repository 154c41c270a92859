//! Complexity of a linear system: the Gaussian rate distortion function of
//! its forward increments as a function of time, distortion and sampling
//! interval, plus the stable-system ceiling and a minimum sampling-rate
//! planner for a channel of given capacity.

use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use crate::dataset::fmt_f64;
use crate::error::{Error, Result};
use crate::matrix::{cholesky, lyapunov_solve, Matrix};
use crate::rdf::{rdf, GaussianSource, RdfResult};
use crate::system::LinearSystemModel;

/// Capacity margin, in bits, demanded by [`min_sampling_rate`].
pub const CAPACITY_MARGIN_BITS: f64 = 1e-9;
/// Smallest sampling interval [`min_sampling_rate`] will consider.
pub const DT_MIN: f64 = 1e-6;
pub const PROBE_DT_MIN: f64 = 1e-3;
pub const PROBE_DT_MAX: f64 = 1e3;
pub const PROBE_POINTS: usize = 121;
/// How far past the probe grid the planner keeps doubling `dt` looking for a
/// crossing before it gives up and reports that no minimum rate is needed.
pub const EXTENDED_DT_MAX: f64 = 1e9;

#[derive(Debug, Clone, Copy)]
pub struct ComplexityQuery<'a> {
    pub model: &'a LinearSystemModel,
    pub t: f64,
    pub dt: f64,
    pub distortion: f64,
}

impl<'a> ComplexityQuery<'a> {
    pub fn new(model: &'a LinearSystemModel, t: f64, dt: f64, distortion: f64) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Input(format!("dt must be positive, got {dt}")));
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::Input(format!("t must be >= 0, got {t}")));
        }
        if !(distortion >= 0.0) || !distortion.is_finite() {
            return Err(Error::Input(format!("distortion must be >= 0, got {distortion}")));
        }
        Ok(ComplexityQuery { model, t, dt, distortion })
    }

    pub fn sampling_rate(&self) -> f64 {
        1.0 / self.dt
    }
}

/// Minimum admissible code rate for the increment over `[t, t + dt]`.
pub fn complexity(query: &ComplexityQuery<'_>) -> Result<RdfResult> {
    let w = query.model.gramian(query.t, query.dt)?;
    rdf(&GaussianSource::centered(w)?, query.distortion)
}

fn rate_bits(model: &LinearSystemModel, dt: f64, distortion: f64) -> Result<f64> {
    Ok(complexity(&ComplexityQuery::new(model, 0.0, dt, distortion)?)?.rate_bits)
}

/// True when every eigenvalue of `a` has negative real part.
///
/// Decided through the Lyapunov characterisation: `a` is Hurwitz iff
/// `A P + P Aᵀ + I = 0` has a positive-definite solution.
pub fn is_hurwitz(a: &Matrix) -> bool {
    if !a.is_square() {
        return false;
    }
    match lyapunov_solve(a, &Matrix::identity(a.rows())) {
        Ok(p) => cholesky(&p).is_ok(),
        Err(_) => false,
    }
}

/// Stationary increment covariance `W_∞`, defined only for Hurwitz drift.
pub fn equilibrium_covariance(model: &LinearSystemModel) -> Result<Matrix> {
    let a = model
        .constant_drift()
        .ok_or_else(|| Error::Input("the ceiling needs a time-invariant drift".into()))?;
    if !is_hurwitz(a) {
        return Err(Error::NoEquilibrium);
    }
    lyapunov_solve(a, model.noise())
}

/// R_∞(D): the rate of the stationary Gaussian source, an upper bound on the
/// complexity at every sampling interval.
pub fn complexity_ceiling(model: &LinearSystemModel, distortion: f64) -> Result<RdfResult> {
    let w = equilibrium_covariance(model)?;
    rdf(&GaussianSource::centered(w)?, distortion)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Dt,
    Fs,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateSample {
    pub dt: f64,
    pub fs: f64,
    pub rate_bits: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub axis: Axis,
    pub distortion: f64,
    /// Sorted by the axis value.
    pub samples: Vec<RateSample>,
    pub asymptote_bits: Option<f64>,
}

impl RateCurve {
    pub fn to_csv(&self, model_tag: &str) -> String {
        let asym = self.asymptote_bits.map_or_else(|| "none".to_string(), fmt_f64);
        let mut out = format!(
            "# D={},asymptote_bits={asym},model={model_tag}\ndt,fs,rate_bits\n",
            fmt_f64(self.distortion)
        );
        for s in &self.samples {
            let _ = writeln!(out, "{},{},{}", fmt_f64(s.dt), fmt_f64(s.fs), fmt_f64(s.rate_bits));
        }
        out
    }

    pub fn last(&self) -> Option<&RateSample> {
        self.samples.last()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Input("empty grid".into()));
    }
    if grid.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::Input("grid values must be positive".into()));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Input("grid must be strictly increasing".into()));
    }
    Ok(())
}

fn asymptote(model: &LinearSystemModel, distortion: f64) -> Result<Option<f64>> {
    match complexity_ceiling(model, distortion) {
        Ok(r) => Ok(Some(r.rate_bits)),
        Err(Error::NoEquilibrium) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Complexity over an increasing grid of sampling intervals.
pub fn rate_curve(model: &LinearSystemModel, distortion: f64, dt_grid: &[f64]) -> Result<RateCurve> {
    check_grid(dt_grid)?;
    let samples = dt_grid
        .iter()
        .map(|&dt| Ok(RateSample { dt, fs: 1.0 / dt, rate_bits: rate_bits(model, dt, distortion)? }))
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve { axis: Axis::Dt, distortion, samples, asymptote_bits: asymptote(model, distortion)? })
}

/// Complexity over an increasing grid of sampling rates.
pub fn rate_curve_fs(model: &LinearSystemModel, distortion: f64, fs_grid: &[f64]) -> Result<RateCurve> {
    check_grid(fs_grid)?;
    let samples = fs_grid
        .iter()
        .map(|&fs| {
            let dt = 1.0 / fs;
            Ok(RateSample { dt, fs, rate_bits: rate_bits(model, dt, distortion)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RateCurve { axis: Axis::Fs, distortion, samples, asymptote_bits: asymptote(model, distortion)? })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SamplingRequirement {
    /// Any sampling rate meets the capacity. `zero_rate` marks the case where
    /// the complexity vanishes everywhere it was probed.
    NotNeeded { ceiling_bits: Option<f64>, zero_rate: bool },
    /// Slowest admissible sampling: `fs = 1/dt` with `R_dt(D) < C`.
    MinRate { fs: f64, dt: f64 },
}

/// Slowest sampling rate at which the complexity fits under `capacity_bits`.
pub fn min_sampling_rate(
    model: &LinearSystemModel,
    distortion: f64,
    capacity_bits: f64,
) -> Result<SamplingRequirement> {
    if model.constant_drift().is_none() {
        return Err(Error::Input("sampling-rate planning needs a time-invariant drift".into()));
    }
    if !(capacity_bits > 0.0) || !capacity_bits.is_finite() {
        return Err(Error::Input(format!("capacity must be positive, got {capacity_bits}")));
    }
    let target = capacity_bits - CAPACITY_MARGIN_BITS;
    let rate = |dt: f64| rate_bits(model, dt, distortion);
    let ceiling = asymptote(model, distortion)?;

    let probe = logspace(PROBE_DT_MIN, PROBE_DT_MAX, PROBE_POINTS);
    let rates = probe.iter().map(|&dt| rate(dt)).collect::<Result<Vec<_>>>()?;
    if rates.iter().all(|&r| r == 0.0) && ceiling.is_none_or(|c| c == 0.0) {
        return Ok(SamplingRequirement::NotNeeded { ceiling_bits: ceiling, zero_rate: true });
    }
    if let Some(c) = ceiling {
        if c < capacity_bits && rates.iter().all(|&r| r < capacity_bits) {
            return Ok(SamplingRequirement::NotNeeded { ceiling_bits: ceiling, zero_rate: false });
        }
    }

    if rate(DT_MIN)? >= target {
        return Err(Error::CapacityInfeasible { capacity_bits, dt_min: DT_MIN });
    }

    let crossing = rates.iter().position(|&r| r >= target);
    let (mut lo, mut hi) = match crossing {
        Some(0) => (DT_MIN, probe[0]),
        Some(i) => (probe[i - 1], probe[i]),
        None => {
            let mut lo = PROBE_DT_MAX;
            loop {
                let hi = 2.0 * lo;
                if hi > EXTENDED_DT_MAX {
                    return Ok(SamplingRequirement::NotNeeded { ceiling_bits: ceiling, zero_rate: false });
                }
                if rate(hi)? >= target {
                    break (lo, hi);
                }
                lo = hi;
            }
        }
    };

    for _ in 0..200 {
        if hi / lo - 1.0 <= 1e-14 {
            break;
        }
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if rate(mid)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(SamplingRequirement::MinRate { fs: 1.0 / lo, dt: lo })
}

/// `points` log-spaced values from `lo` to `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..points)
                .map(|i| {
                    if i == 0 {
                        lo
                    } else if i == points - 1 {
                        hi
                    } else {
                        (a + (b - a) * i as f64 / (points - 1) as f64).exp()
                    }
                })
                .collect()
        }
    }
}

pub fn linspace(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    match points {
        0 => vec![],
        1 => vec![lo],
        _ => (0..points)
            .map(|i| if i == points - 1 { hi } else { lo + (hi - lo) * i as f64 / (points - 1) as f64 })
            .collect(),
    }
}

/// Short stable fingerprint of a time-invariant model (SHA-256 of its
/// dimension and entries, first 8 bytes in hex).
pub fn model_fingerprint(model: &LinearSystemModel) -> String {
    let Some(a) = model.constant_drift() else {
        return "time-varying".into();
    };
    let mut h = Sha256::new();
    h.update((model.dim() as u64).to_le_bytes());
    for v in a.as_slice().iter().chain(model.noise().as_slice()) {
        h.update(v.to_le_bytes());
    }
    h.finalize()[..8].iter().map(|b| format!("{b:02x}")).collect()
}
