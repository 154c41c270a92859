//! Run configuration, demo presets and the four command workflows behind the
//! `sysrate` binary. Each command is a pure function of its inputs and seed;
//! the binary only handles arguments and files.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::complexity::{
    linspace, logspace, min_sampling_rate, model_fingerprint, rate_curve, rate_curve_fs, RateCurve,
    SamplingRequirement,
};
use crate::dataset::{fmt_f64, TrajectoryDataset};
use crate::emulation::{average_codes, emulate_path, emulated_increment_moments, initial_mean, SourceFamily};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rdf::{rdf, GaussianSource};
use crate::stats::{pooled_increment_covariance, step_moments};
use crate::system::LinearSystemModel;

pub const DEFAULT_DISTORTION: f64 = 0.01;

/// Demo systems for the three stability regimes, plus scalar Brownian motion.
///
/// | preset     | A                          | N    | W_∞            |
/// |------------|----------------------------|------|----------------|
/// | `stable`   | `[[-0.5, 1], [-1, -0.5]]`  | `I₂` | `I₂`           |
/// | `marginal` | `[[0, 1], [-1, 0]]`        | `I₂` | none (±i)      |
/// | `unstable` | `[[0.3, 1], [0, -0.3]]`    | `I₂` | none (±0.3)    |
/// | `brownian` | `[[0]]`                    | `1`  | none           |
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Stable,
    Marginal,
    Unstable,
    Brownian,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Stable, Preset::Marginal, Preset::Unstable, Preset::Brownian];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Stable => "stable",
            Preset::Marginal => "marginal",
            Preset::Unstable => "unstable",
            Preset::Brownian => "brownian",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::Parse(format!("unknown preset '{name}'")))
    }

    pub fn drift(self) -> Matrix {
        let rows: Vec<Vec<f64>> = match self {
            Preset::Stable => vec![vec![-0.5, 1.0], vec![-1.0, -0.5]],
            Preset::Marginal => vec![vec![0.0, 1.0], vec![-1.0, 0.0]],
            Preset::Unstable => vec![vec![0.3, 1.0], vec![0.0, -0.3]],
            Preset::Brownian => vec![vec![0.0]],
        };
        Matrix::from_rows(&rows).expect("preset drift is well formed")
    }

    pub fn noise(self) -> Matrix {
        Matrix::identity(self.drift().rows())
    }

    pub fn model(self) -> LinearSystemModel {
        LinearSystemModel::constant(self.drift(), self.noise()).expect("preset model is valid")
    }
}

/// `{"preset": "stable"}`, `{"A": [[..]], "N": [[..]]}`, or a preset with
/// either matrix overridden.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(rename = "A", default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<f64>>>,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<Vec<Vec<f64>>>,
}

impl SystemSpec {
    pub fn model(&self) -> Result<LinearSystemModel> {
        let preset = self.preset.as_deref().map(Preset::from_name).transpose()?;
        let a = match (&self.a, preset) {
            (Some(rows), _) => Matrix::from_rows(rows)?,
            (None, Some(p)) => p.drift(),
            (None, None) => return Err(Error::Parse("system needs a preset or an A matrix".into())),
        };
        let n = match (&self.n, preset) {
            (Some(rows), _) => Matrix::from_rows(rows)?,
            (None, Some(p)) if p.drift().rows() == a.rows() => p.noise(),
            _ => return Err(Error::Parse("system needs an N matrix".into())),
        };
        LinearSystemModel::constant(a, n)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridAxis {
    #[default]
    Dt,
    Fs,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    #[serde(default = "default_true")]
    pub log: bool,
    #[serde(default)]
    pub axis: GridAxis,
}

fn default_true() -> bool {
    true
}

fn default_distortion() -> f64 {
    DEFAULT_DISTORTION
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>> {
        if self.points == 0 {
            return Err(Error::Parse("grid needs at least one point".into()));
        }
        if !(self.min > 0.0) || !self.max.is_finite() {
            return Err(Error::Parse("grid bounds must be positive and finite".into()));
        }
        if self.points > 1 && !(self.max > self.min) {
            return Err(Error::Parse("grid max must exceed min".into()));
        }
        Ok(if self.log {
            logspace(self.min, self.max, self.points)
        } else {
            linspace(self.min, self.max, self.points)
        })
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { min: 1e-2, max: 1e2, points: 100, log: true, axis: GridAxis::Dt }
    }
}

/// JSON run configuration shared by the model-driven commands.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub system: SystemSpec,
    #[serde(default = "default_distortion")]
    pub distortion: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub capacity_bits: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
}

impl RunConfig {
    pub fn preset(preset: Preset) -> Self {
        RunConfig {
            system: SystemSpec { preset: Some(preset.name().into()), ..Default::default() },
            distortion: DEFAULT_DISTORTION,
            capacity_bits: None,
            grid: None,
            x0: None,
            dt: None,
            steps: None,
            trials: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if !(cfg.distortion >= 0.0) || !cfg.distortion.is_finite() {
            return Err(Error::Parse(format!("distortion must be >= 0, got {}", cfg.distortion)));
        }
        Ok(cfg)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn model(&self) -> Result<LinearSystemModel> {
        self.system.model()
    }
}

pub struct CurveOutput {
    pub curve: RateCurve,
    pub csv: String,
    pub report: String,
}

/// Rate curve over the configured grid (default: 100 log-spaced `dt` in
/// `[0.01, 100]`).
pub fn cmd_rdf_curve(cfg: &RunConfig) -> Result<CurveOutput> {
    let model = cfg.model()?;
    let grid = cfg.grid.clone().unwrap_or_default();
    let values = grid.values()?;
    let curve = match grid.axis {
        GridAxis::Dt => rate_curve(&model, cfg.distortion, &values)?,
        GridAxis::Fs => rate_curve_fs(&model, cfg.distortion, &values)?,
    };
    let csv = curve.to_csv(&model_fingerprint(&model));
    let last = curve.last().map_or(0.0, |s| s.rate_bits);
    let report = format!(
        "points={} distortion={} asymptote_bits={} final_rate_bits={}",
        curve.samples.len(),
        fmt_f64(cfg.distortion),
        curve.asymptote_bits.map_or_else(|| "none".into(), fmt_f64),
        fmt_f64(last)
    );
    Ok(CurveOutput { curve, csv, report })
}

/// Single-line `key=value` answer to the minimum-attention question.
pub fn cmd_min_rate(cfg: &RunConfig) -> Result<String> {
    let capacity = cfg
        .capacity_bits
        .ok_or_else(|| Error::Parse("min-rate needs capacity_bits in the config".into()))?;
    let model = cfg.model()?;
    Ok(match min_sampling_rate(&model, cfg.distortion, capacity)? {
        SamplingRequirement::MinRate { fs, dt } => format!(
            "fs_min={} dt_max={} capacity_bits={} distortion={}",
            fmt_f64(fs),
            fmt_f64(dt),
            fmt_f64(capacity),
            fmt_f64(cfg.distortion)
        ),
        SamplingRequirement::NotNeeded { ceiling_bits, zero_rate } => format!(
            "not_needed ceiling_bits={} zero_rate={zero_rate} capacity_bits={} distortion={}",
            ceiling_bits.map_or_else(|| "none".into(), fmt_f64),
            fmt_f64(capacity),
            fmt_f64(cfg.distortion)
        ),
    })
}

/// Exact-discretization training data. Defaults: `dt = 0.01`, 300 steps,
/// 50 trials, `x0 = (1, …, 1)`.
pub fn cmd_sample(cfg: &RunConfig, seed: u64) -> Result<TrajectoryDataset> {
    let model = cfg.model()?;
    let x0 = cfg.x0.clone().unwrap_or_else(|| vec![1.0; model.dim()]);
    model.sample_paths(
        &x0,
        cfg.dt.unwrap_or(0.01),
        cfg.steps.unwrap_or(300),
        cfg.trials.unwrap_or(50),
        seed,
    )
}

pub struct EmulateOutput {
    pub trajectory: TrajectoryDataset,
    pub report: EmulationReport,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmulationReport {
    pub steps: usize,
    pub trials: usize,
    pub infeasible: usize,
    /// Fraction of steps whose exact emulator increment mean lies within 3
    /// training standard errors of the training mean.
    pub mean_within_3se: f64,
    pub cov_within_3se: f64,
    pub max_mean_z: f64,
    pub max_cov_z: f64,
    pub distortion: f64,
    /// Gaussian rate of the pooled empirical increment covariance.
    pub rate_bits: f64,
}

impl EmulationReport {
    pub fn line(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "steps={} trials={} infeasible={} mean_within_3se={:.4} cov_within_3se={:.4} max_mean_z={} max_cov_z={} distortion={} rate_bits={}",
            self.steps,
            self.trials,
            self.infeasible,
            self.mean_within_3se,
            self.cov_within_3se,
            fmt_f64(self.max_mean_z),
            fmt_f64(self.max_cov_z),
            fmt_f64(self.distortion),
            fmt_f64(self.rate_bits)
        );
        s
    }
}

/// Emulates one new trial and scores the emulator's exact per-step increment
/// law against the training statistics.
pub fn cmd_emulate(
    dataset: &TrajectoryDataset,
    family: &SourceFamily,
    resolution: u64,
    seed: u64,
    distortion: f64,
) -> Result<EmulateOutput> {
    if dataset.dim() != family.dim() {
        return Err(Error::Dimension(format!(
            "dataset has dimension {}, family has {}",
            dataset.dim(),
            family.dim()
        )));
    }
    let codes = average_codes(dataset, family)?;
    let x0 = initial_mean(dataset);
    let path = emulate_path(&codes, family, &x0, resolution, seed, 0)?;

    let train = step_moments(dataset);
    let l = dataset.trials() as f64;
    let n = dataset.dim();
    let (mut mean_ok, mut cov_ok) = (0usize, 0usize);
    let (mut max_mean_z, mut max_cov_z): (f64, f64) = (0.0, 0.0);
    for (k, tm) in train.iter().enumerate() {
        let (em, ec) = match &codes.steps[k] {
            Some(code) => emulated_increment_moments(family, &path[k], code, resolution)?,
            None => (vec![0.0; n], Matrix::zeros(n, n)),
        };
        let (mut mz, mut cz): (f64, f64) = (0.0, 0.0);
        for i in 0..n {
            mz = mz.max(z(em[i] - tm.mean[i], tm.cov[(i, i)] / l));
            for j in 0..n {
                let var = (tm.cov[(i, i)] * tm.cov[(j, j)] + tm.cov[(i, j)].powi(2)) / (l - 1.0).max(1.0);
                cz = cz.max(z(ec[(i, j)] - tm.cov[(i, j)], var));
            }
        }
        mean_ok += usize::from(mz <= 3.0);
        cov_ok += usize::from(cz <= 3.0);
        max_mean_z = max_mean_z.max(mz);
        max_cov_z = max_cov_z.max(cz);
    }
    let steps = train.len();
    let w = pooled_increment_covariance(dataset);
    let rate_bits = rdf(&GaussianSource::centered(w)?, distortion)?.rate_bits;
    let trajectory = TrajectoryDataset::with_start(dataset.dt(), dataset.t0(), vec![path])?;
    Ok(EmulateOutput {
        trajectory,
        report: EmulationReport {
            steps,
            trials: dataset.trials(),
            infeasible: codes.infeasible,
            mean_within_3se: mean_ok as f64 / steps as f64,
            cov_within_3se: cov_ok as f64 / steps as f64,
            max_mean_z,
            max_cov_z,
            distortion,
            rate_bits,
        },
    })
}

fn z(diff: f64, var: f64) -> f64 {
    if diff.abs() <= 1e-15 {
        0.0
    } else if var <= 0.0 {
        f64::INFINITY
    } else {
        diff.abs() / var.sqrt()
    }
}
