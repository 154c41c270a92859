//! Uniformly sampled multi-trial trajectories and their CSV form.
//!
//! ```text
//! trial,k,t,x1,...,xn
//! 0,0,0.0000000000000000e0,...
//! ```
//! Rows are sorted by `(trial, k)`; floats carry 17 significant digits so a
//! write/read cycle is lossless.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryDataset {
    dt: f64,
    t0: f64,
    /// `states[trial][k]` is the state at time `t0 + k·dt`.
    states: Vec<Vec<Vec<f64>>>,
}

pub(crate) fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

impl TrajectoryDataset {
    pub fn new(dt: f64, states: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        Self::with_start(dt, 0.0, states)
    }

    pub fn with_start(dt: f64, t0: f64, states: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t0.is_finite() {
            return Err(Error::Input(format!("sampling interval must be positive, got {dt}")));
        }
        if states.is_empty() {
            return Err(Error::Input("dataset has no trials".into()));
        }
        let len = states[0].len();
        if len < 2 {
            return Err(Error::Input("each trial needs at least two samples".into()));
        }
        let n = states[0][0].len();
        if n == 0 {
            return Err(Error::Dimension("zero-dimensional states".into()));
        }
        for (i, trial) in states.iter().enumerate() {
            if trial.len() != len {
                return Err(Error::Dimension(format!(
                    "trial {i} has {} samples, expected {len}",
                    trial.len()
                )));
            }
            for x in trial {
                if x.len() != n {
                    return Err(Error::Dimension(format!("trial {i} mixes state dimensions")));
                }
                if x.iter().any(|v| !v.is_finite()) {
                    return Err(Error::Input(format!("trial {i} has non-finite states")));
                }
            }
        }
        Ok(TrajectoryDataset { dt, t0, states })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    /// Number of trials L.
    pub fn trials(&self) -> usize {
        self.states.len()
    }

    /// Number of steps T; each trial holds T+1 states.
    pub fn steps(&self) -> usize {
        self.states[0].len() - 1
    }

    pub fn dim(&self) -> usize {
        self.states[0][0].len()
    }

    pub fn trial(&self, i: usize) -> &[Vec<f64>] {
        &self.states[i]
    }

    pub fn states(&self) -> &[Vec<Vec<f64>>] {
        &self.states
    }

    /// `(x(k+1) − x(k), x(k))` for every trial at step `k`.
    pub fn increments(&self, k: usize) -> Vec<(Vec<f64>, &[f64])> {
        self.states
            .iter()
            .map(|tr| {
                let dx = tr[k + 1].iter().zip(&tr[k]).map(|(a, b)| a - b).collect();
                (dx, tr[k].as_slice())
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        let n = self.dim();
        let mut out = String::from("trial,k,t");
        for j in 1..=n {
            let _ = write!(out, ",x{j}");
        }
        out.push('\n');
        for (i, trial) in self.states.iter().enumerate() {
            for (k, x) in trial.iter().enumerate() {
                let t = self.t0 + k as f64 * self.dt;
                let _ = write!(out, "{i},{k},{}", fmt_f64(t));
                for v in x {
                    out.push(',');
                    out.push_str(&fmt_f64(*v));
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty dataset".into()))?;
        let cols: Vec<&str> = header.split(',').map(str::trim).collect();
        if cols.len() < 4 || cols[..3] != ["trial", "k", "t"] {
            return Err(Error::Parse(format!("bad dataset header: {header}")));
        }
        let n = cols.len() - 3;

        let mut trials: Vec<Vec<Vec<f64>>> = Vec::new();
        let mut times: Vec<Vec<f64>> = Vec::new();
        let mut last_trial: Option<usize> = None;
        for (lineno, line) in lines.enumerate() {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != cols.len() {
                return Err(Error::Parse(format!("row {}: expected {} fields", lineno + 2, cols.len())));
            }
            let bad = |what: &str| Error::Parse(format!("row {}: bad {what}", lineno + 2));
            let trial: usize = f[0].parse().map_err(|_| bad("trial"))?;
            let k: usize = f[1].parse().map_err(|_| bad("k"))?;
            let t: f64 = f[2].parse().map_err(|_| bad("t"))?;
            let x = f[3..]
                .iter()
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| bad("state"))?;
            if last_trial != Some(trial) {
                if trial != last_trial.map_or(0, |l| l + 1) {
                    return Err(Error::Parse(format!(
                        "row {}: trials must be numbered 0,1,2,... in order",
                        lineno + 2
                    )));
                }
                trials.push(Vec::new());
                times.push(Vec::new());
                last_trial = Some(trial);
            }
            let cur = trials.last_mut().unwrap();
            if k != cur.len() {
                return Err(Error::Parse(format!("row {}: steps must be 0,1,2,... in order", lineno + 2)));
            }
            cur.push(x);
            times.last_mut().unwrap().push(t);
        }
        if trials.is_empty() {
            return Err(Error::Input("dataset has no rows".into()));
        }
        if times[0].len() < 2 {
            return Err(Error::Input("each trial needs at least two samples".into()));
        }
        let t0 = times[0][0];
        let dt = times[0][1] - times[0][0];
        for ts in &times {
            for (k, &t) in ts.iter().enumerate() {
                let want = t0 + k as f64 * dt;
                if (t - want).abs() > 1e-9 * want.abs().max(dt) {
                    return Err(Error::Parse("time column is not a uniform grid".into()));
                }
            }
        }
        let ds = TrajectoryDataset::with_start(dt, t0, trials)?;
        debug_assert_eq!(ds.dim(), n);
        Ok(ds)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}
