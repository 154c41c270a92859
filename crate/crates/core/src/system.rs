//! Linear Itô systems `dx = A(t) x dt + dw` with noise intensity `N`, and the
//! Gaussian law of their forward increments over a sampling interval.

use std::fmt;
use std::sync::Arc;

use crate::dataset::TrajectoryDataset;
use crate::error::{Error, Result};
use crate::matrix::{cholesky, mat_exp, sym_eig, Matrix};
use crate::rng::{standard_normals, Stream};

pub const NOISE_PSD_TOL: f64 = 1e-9;
/// Cholesky pivots below this fraction of `tr W` switch sampling to an
/// eigen square root.
pub const CHOLESKY_PIVOT_REL: f64 = 1e-12;
/// Van Loan is applied on sub-intervals with `‖A‖₁·h` at most this, then
/// the Gramian is doubled back up to the requested interval.
pub const VAN_LOAN_MAX_NORM: f64 = 1.0;

pub type DriftFn = Arc<dyn Fn(f64) -> Matrix + Send + Sync>;

#[derive(Clone)]
pub enum Drift {
    Constant(Matrix),
    TimeVarying(DriftFn),
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            Drift::TimeVarying(_) => f.write_str("TimeVarying(<fn>)"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystemModel {
    dim: usize,
    drift: Drift,
    noise: Matrix,
}

fn validate_noise(noise: &Matrix, n: usize) -> Result<()> {
    if noise.rows() != n || noise.cols() != n {
        return Err(Error::Dimension(format!(
            "noise intensity is {}x{}, state dimension is {n}",
            noise.rows(),
            noise.cols()
        )));
    }
    let scale = noise.max_abs().max(1.0);
    if noise.asymmetry() > NOISE_PSD_TOL * scale {
        return Err(Error::Input("noise intensity must be symmetric".into()));
    }
    let eig = sym_eig(noise)?;
    if eig.values.iter().any(|&v| v < -NOISE_PSD_TOL * scale) {
        return Err(Error::Input("noise intensity must be positive semidefinite".into()));
    }
    Ok(())
}

impl LinearSystemModel {
    pub fn constant(a: Matrix, noise: Matrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension("drift must be square".into()));
        }
        let n = a.rows();
        validate_noise(&noise, n)?;
        Ok(LinearSystemModel { dim: n, drift: Drift::Constant(a), noise: noise.symmetrize() })
    }

    pub fn time_varying(
        dim: usize,
        drift: impl Fn(f64) -> Matrix + Send + Sync + 'static,
        noise: Matrix,
    ) -> Result<Self> {
        validate_noise(&noise, dim)?;
        let probe = drift(0.0);
        if probe.rows() != dim || probe.cols() != dim {
            return Err(Error::Dimension("drift function has the wrong shape".into()));
        }
        Ok(LinearSystemModel {
            dim,
            drift: Drift::TimeVarying(Arc::new(drift)),
            noise: noise.symmetrize(),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn drift(&self) -> &Drift {
        &self.drift
    }

    pub fn noise(&self) -> &Matrix {
        &self.noise
    }

    /// The drift matrix when it is time-invariant.
    pub fn constant_drift(&self) -> Option<&Matrix> {
        match &self.drift {
            Drift::Constant(a) => Some(a),
            Drift::TimeVarying(_) => None,
        }
    }

    fn require_constant(&self) -> Result<&Matrix> {
        self.constant_drift()
            .ok_or_else(|| Error::Input("operation needs a time-invariant drift".into()))
    }

    fn drift_at(&self, t: f64) -> Result<Matrix> {
        let a = match &self.drift {
            Drift::Constant(a) => a.clone(),
            Drift::TimeVarying(f) => f(t),
        };
        if a.rows() != self.dim || a.cols() != self.dim || a.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::Input(format!("drift is not a finite {0}x{0} matrix at t = {t}", self.dim)));
        }
        Ok(a)
    }

    fn substeps(&self, t: f64, dt: f64) -> Result<usize> {
        let norm = self.drift_at(t)?.norm1();
        Ok(64usize.max((dt * norm * 16.0).ceil() as usize))
    }

    /// Φ(t + dt, t).
    pub fn state_transition(&self, t: f64, dt: f64) -> Result<Matrix> {
        check_time(t)?;
        if !(dt >= 0.0) || !dt.is_finite() {
            return Err(Error::Input(format!("dt must be finite and >= 0, got {dt}")));
        }
        match &self.drift {
            Drift::Constant(a) => mat_exp(a, dt),
            Drift::TimeVarying(_) => {
                if dt == 0.0 {
                    return Ok(Matrix::identity(self.dim));
                }
                let steps = self.substeps(t, dt)?;
                let (phi, _) = self.integrate_tv(t, dt, steps, false)?;
                Ok(phi)
            }
        }
    }

    /// Fixed-step RK4 for `Φ' = A Φ` and, optionally, `W' = A W + W Aᵀ + N`.
    fn integrate_tv(&self, t: f64, dt: f64, steps: usize, gramian: bool) -> Result<(Matrix, Matrix)> {
        let n = self.dim;
        let h = dt / steps as f64;
        let mut phi = Matrix::identity(n);
        let mut w = Matrix::zeros(n, n);
        let lyap = |a: &Matrix, w: &Matrix| -> Matrix {
            let aw = a.mul_unchecked(w);
            aw.add(&aw.transpose()).unwrap().add(&self.noise).unwrap()
        };
        for s in 0..steps {
            let tau = t + s as f64 * h;
            let a0 = self.drift_at(tau)?;
            let am = self.drift_at(tau + 0.5 * h)?;
            let a1 = self.drift_at(tau + h)?;

            let k1 = a0.mul_unchecked(&phi);
            let k2 = am.mul_unchecked(&phi.add(&k1.scale(0.5 * h))?);
            let k3 = am.mul_unchecked(&phi.add(&k2.scale(0.5 * h))?);
            let k4 = a1.mul_unchecked(&phi.add(&k3.scale(h))?);
            let next_phi = phi.add(&rk4_combine(&k1, &k2, &k3, &k4, h))?;

            if gramian {
                let l1 = lyap(&a0, &w);
                let l2 = lyap(&am, &w.add(&l1.scale(0.5 * h))?);
                let l3 = lyap(&am, &w.add(&l2.scale(0.5 * h))?);
                let l4 = lyap(&a1, &w.add(&l3.scale(h))?);
                w = w.add(&rk4_combine(&l1, &l2, &l3, &l4, h))?;
            }
            phi = next_phi;
        }
        Ok((phi, w.symmetrize()))
    }

    /// Law of `X(t+dt) − X(t)` given `X(t) = x_t`.
    pub fn increment_distribution(&self, x_t: &[f64], t: f64, dt: f64) -> Result<IncrementDistribution> {
        check_time(t)?;
        if x_t.len() != self.dim {
            return Err(Error::Dimension(format!(
                "state has length {}, system dimension is {}",
                x_t.len(),
                self.dim
            )));
        }
        let (phi, w) = self.transition_and_gramian(t, dt)?;
        let mut mean = phi.matvec(x_t)?;
        for (m, x) in mean.iter_mut().zip(x_t) {
            *m -= x;
        }
        Ok(IncrementDistribution { mean, covariance: w, t, dt })
    }

    /// Increment covariance W_t(dt).
    pub fn gramian(&self, t: f64, dt: f64) -> Result<Matrix> {
        check_time(t)?;
        Ok(self.transition_and_gramian(t, dt)?.1)
    }

    pub(crate) fn transition_and_gramian(&self, t: f64, dt: f64) -> Result<(Matrix, Matrix)> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(Error::Input(format!("dt must be finite and > 0, got {dt}")));
        }
        match &self.drift {
            Drift::Constant(a) => van_loan(a, &self.noise, dt),
            Drift::TimeVarying(_) => {
                let steps = self.substeps(t, dt)?;
                self.integrate_tv(t, dt, steps, true)
            }
        }
    }

    /// Max-norm residual of `dW/dΔt = A W + W Aᵀ + N`, using a central
    /// difference of width `2·step` at each grid point.
    pub fn gramian_derivative_residual(&self, dt_grid: &[f64], step: f64) -> Result<Vec<f64>> {
        let a = self.require_constant()?;
        if !(step > 0.0) {
            return Err(Error::Input("difference step must be positive".into()));
        }
        let at = a.transpose();
        dt_grid
            .iter()
            .map(|&dt| {
                if !(dt >= step) || !dt.is_finite() {
                    return Err(Error::Input(format!("grid point {dt} is below the difference step {step}")));
                }
                let w_hi = self.gramian(0.0, dt + step)?;
                let w_lo = if dt == step {
                    Matrix::zeros(self.dim, self.dim)
                } else {
                    self.gramian(0.0, dt - step)?
                };
                let w = self.gramian(0.0, dt)?;
                let deriv = w_hi.sub(&w_lo)?.scale(0.5 / step);
                let rhs = a.mul_unchecked(&w).add(&w.mul_unchecked(&at))?.add(&self.noise)?;
                Ok(deriv.sub(&rhs)?.max_abs())
            })
            .collect()
    }

    /// Exact-discretization sample paths `x_{k+1} = Φ x_k + ξ_k`,
    /// `ξ_k ~ N(0, W(dt))`, with noise keyed by `(seed, trial, step)`.
    pub fn sample_paths(
        &self,
        x0: &[f64],
        dt: f64,
        steps: usize,
        trials: usize,
        seed: u64,
    ) -> Result<TrajectoryDataset> {
        self.require_constant()?;
        if x0.len() != self.dim {
            return Err(Error::Dimension(format!(
                "x0 has length {}, system dimension is {}",
                x0.len(),
                self.dim
            )));
        }
        if steps == 0 || trials == 0 {
            return Err(Error::Input("need at least one step and one trial".into()));
        }
        let (phi, w) = self.transition_and_gramian(0.0, dt)?;
        let root = noise_root(&w)?;
        let n = self.dim;
        let states = (0..trials)
            .map(|trial| {
                let mut path = Vec::with_capacity(steps + 1);
                let mut x = x0.to_vec();
                path.push(x.clone());
                for k in 0..steps {
                    let z = standard_normals(seed, Stream::ProcessNoise, trial as u64, k as u64, n);
                    let xi = root.matvec(&z).expect("square root is n x n");
                    x = phi
                        .matvec(&x)
                        .expect("transition is n x n")
                        .iter()
                        .zip(&xi)
                        .map(|(a, b)| a + b)
                        .collect();
                    path.push(x.clone());
                }
                path
            })
            .collect();
        TrajectoryDataset::new(dt, states)
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Input(format!("time must be finite and >= 0, got {t}")));
    }
    Ok(())
}

fn rk4_combine(k1: &Matrix, k2: &Matrix, k3: &Matrix, k4: &Matrix, h: f64) -> Matrix {
    let s = k1.add(&k2.scale(2.0)).unwrap().add(&k3.scale(2.0)).unwrap().add(k4).unwrap();
    s.scale(h / 6.0)
}

/// `(Φ(dt), W(dt))` for constant drift.
///
/// Van Loan: `exp([[−A, N], [0, Aᵀ]]·h)` has blocks `F₁₂`, `F₂₂` with
/// `W(h) = F₂₂ᵀ F₁₂` and `Φ(h) = F₂₂ᵀ`. The exponential of `−A` blows up
/// over long stable horizons, so it is only evaluated on `h = dt / 2^k` and
/// the interval is doubled back with `W(2h) = Φ(h) W(h) Φ(h)ᵀ + W(h)`.
pub fn van_loan(a: &Matrix, noise: &Matrix, dt: f64) -> Result<(Matrix, Matrix)> {
    let n = a.rows();
    let scaled = a.norm1() * dt;
    let halvings = if scaled > VAN_LOAN_MAX_NORM {
        (scaled / VAN_LOAN_MAX_NORM).log2().ceil() as i32
    } else {
        0
    };
    let h = dt / 2f64.powi(halvings);

    let mut aug = Matrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = -a[(i, j)];
            aug[(i, n + j)] = noise[(i, j)];
            aug[(n + i, n + j)] = a[(j, i)];
        }
    }
    let f = mat_exp(&aug, h)?;
    let mut f12 = Matrix::zeros(n, n);
    let mut phi = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            f12[(i, j)] = f[(i, n + j)];
            phi[(j, i)] = f[(n + i, n + j)];
        }
    }
    let mut w = phi.mul_unchecked(&f12).symmetrize();
    for _ in 0..halvings {
        w = phi.mul_unchecked(&w).mul_unchecked(&phi.transpose()).add(&w)?.symmetrize();
        phi = phi.mul_unchecked(&phi);
    }
    Ok((phi, w))
}

/// A factor `R` with `R Rᵀ = W`: Cholesky when well conditioned, otherwise
/// the eigen square root.
pub fn noise_root(w: &Matrix) -> Result<Matrix> {
    let tr = w.trace();
    if tr > 0.0 {
        if let Ok(l) = cholesky(w) {
            let min_pivot = l.diagonal().iter().fold(f64::INFINITY, |m, &d| m.min(d * d));
            if min_pivot >= CHOLESKY_PIVOT_REL * tr {
                return Ok(l);
            }
        }
    }
    let eig = sym_eig(w)?;
    let n = w.rows();
    let mut r = Matrix::zeros(n, n);
    for k in 0..n {
        let s = eig.values[k].max(0.0).sqrt();
        for i in 0..n {
            r[(i, k)] = eig.vectors[(i, k)] * s;
        }
    }
    Ok(r)
}

/// `ΔX(t) ~ N(mean, covariance)` over `[t, t + dt]`.
#[derive(Debug, Clone)]
pub struct IncrementDistribution {
    pub mean: Vec<f64>,
    pub covariance: Matrix,
    pub t: f64,
    pub dt: f64,
}
