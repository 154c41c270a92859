//! Emulating systems `ẋ = Σ Vᵢ(x) uᵢ(t)` driven by binary activation
//! patterns over a finite source family, the source codes built from their
//! endpoint maps, and the multinomial trajectory emulator.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::TrajectoryDataset;
use crate::error::{Error, Result};
use crate::lp;
use crate::matrix::Matrix;
use crate::rng::multinomial;

/// Probability vectors must sum to one within this.
pub const SIMPLEX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum VectorField {
    Constant(Vec<f64>),
    /// `V(x) = M x + b`.
    Affine { m: Matrix, b: Vec<f64> },
}

impl VectorField {
    pub fn dim(&self) -> usize {
        match self {
            VectorField::Constant(v) => v.len(),
            VectorField::Affine { b, .. } => b.len(),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, VectorField::Constant(_))
    }

    pub fn eval(&self, x: &[f64]) -> Vec<f64> {
        match self {
            VectorField::Constant(v) => v.clone(),
            VectorField::Affine { m, b } => {
                let mut out = m.matvec(x).expect("field dimension checked at construction");
                for (o, bi) in out.iter_mut().zip(b) {
                    *o += bi;
                }
                out
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FieldSpec {
    Constant(Vec<f64>),
    Affine {
        #[serde(rename = "M")]
        m: Vec<Vec<f64>>,
        b: Vec<f64>,
    },
}

/// The vector fields {Vᵢ} of an emulating system.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceFamily {
    fields: Vec<VectorField>,
    dim: usize,
}

impl SourceFamily {
    pub fn new(fields: Vec<VectorField>) -> Result<Self> {
        let Some(first) = fields.first() else {
            return Err(Error::Input("a source family needs at least one field".into()));
        };
        let dim = first.dim();
        if dim == 0 {
            return Err(Error::Dimension("zero-dimensional vector field".into()));
        }
        for (i, f) in fields.iter().enumerate() {
            let ok = match f {
                VectorField::Constant(v) => v.len() == dim && v.iter().all(|x| x.is_finite()),
                VectorField::Affine { m, b } => m.rows() == dim && m.cols() == dim && b.len() == dim,
            };
            if !ok {
                return Err(Error::Dimension(format!("field {i} does not match dimension {dim}")));
            }
        }
        Ok(SourceFamily { fields, dim })
    }

    pub fn constant(vectors: Vec<Vec<f64>>) -> Result<Self> {
        SourceFamily::new(vectors.into_iter().map(VectorField::Constant).collect())
    }

    /// All integer vectors in `[-radius, radius]²` except the origin, in
    /// lexicographic order: (−r,−r), (−r,−r+1), …, (r,r).
    pub fn planar_grid(radius: i32) -> Self {
        let mut v = Vec::new();
        for a in -radius..=radius {
            for b in -radius..=radius {
                if a != 0 || b != 0 {
                    v.push(vec![a as f64, b as f64]);
                }
            }
        }
        SourceFamily::constant(v).expect("grid family is well formed")
    }

    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn fields(&self) -> &[VectorField] {
        &self.fields
    }

    pub fn is_constant(&self) -> bool {
        self.fields.iter().all(VectorField::is_constant)
    }

    /// Fields evaluated at `x`, one per column.
    pub fn field_matrix(&self, x: &[f64]) -> Matrix {
        let mut m = Matrix::zeros(self.dim, self.len());
        for (j, f) in self.fields.iter().enumerate() {
            for (i, v) in f.eval(x).into_iter().enumerate() {
                m[(i, j)] = v;
            }
        }
        m
    }

    fn check_state(&self, x: &[f64], what: &str) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::Dimension(format!(
                "{what} has length {}, family dimension is {}",
                x.len(),
                self.dim
            )));
        }
        Ok(())
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let specs: Vec<FieldSpec> = serde_json::from_str(text)?;
        let fields = specs
            .into_iter()
            .map(|s| match s {
                FieldSpec::Constant(v) => Ok(VectorField::Constant(v)),
                FieldSpec::Affine { m, b } => Ok(VectorField::Affine { m: Matrix::from_rows(&m)?, b }),
            })
            .collect::<Result<Vec<_>>>()?;
        SourceFamily::new(fields)
    }

    pub fn to_json(&self) -> String {
        let specs: Vec<FieldSpec> = self
            .fields
            .iter()
            .map(|f| match f {
                VectorField::Constant(v) => FieldSpec::Constant(v.clone()),
                VectorField::Affine { m, b } => FieldSpec::Affine { m: m.to_rows(), b: b.clone() },
            })
            .collect();
        serde_json::to_string(&specs).expect("family serializes")
    }

    pub fn read_json(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

/// An admissible control over a horizon.
#[derive(Debug, Clone, PartialEq)]
pub enum ActivationSchedule {
    /// One field at a time on `indices.len()` uniform segments.
    OneHot { indices: Vec<usize>, horizon: f64 },
    /// Arbitrary {0,1}^K patterns; `patterns[j]` holds on
    /// `[switch_times[j-1], switch_times[j])`, with times relative to the
    /// start of the horizon.
    Overlapping { switch_times: Vec<f64>, patterns: Vec<Vec<bool>>, horizon: f64 },
}

impl ActivationSchedule {
    pub fn horizon(&self) -> f64 {
        match self {
            ActivationSchedule::OneHot { horizon, .. } | ActivationSchedule::Overlapping { horizon, .. } => {
                *horizon
            }
        }
    }

    /// `(duration, active field indices)` per constant-activation segment.
    pub fn segments(&self, k: usize) -> Result<Vec<(f64, Vec<usize>)>> {
        let horizon = self.horizon();
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Input(format!("horizon must be positive, got {horizon}")));
        }
        match self {
            ActivationSchedule::OneHot { indices, .. } => {
                if indices.is_empty() {
                    return Err(Error::Input("one-hot schedule needs at least one segment".into()));
                }
                if let Some(&bad) = indices.iter().find(|&&i| i >= k) {
                    return Err(Error::Input(format!("field index {bad} out of range for K = {k}")));
                }
                let h = horizon / indices.len() as f64;
                Ok(indices.iter().map(|&i| (h, vec![i])).collect())
            }
            ActivationSchedule::Overlapping { switch_times, patterns, .. } => {
                if patterns.len() != switch_times.len() + 1 {
                    return Err(Error::Input("need one more pattern than switching times".into()));
                }
                if patterns.iter().any(|p| p.len() != k) {
                    return Err(Error::Input(format!("activation patterns must have length {k}")));
                }
                let mut edges = vec![0.0];
                edges.extend(switch_times.iter().copied());
                edges.push(horizon);
                if edges.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(Error::Input("switching times must increase strictly inside the horizon".into()));
                }
                Ok(edges
                    .windows(2)
                    .zip(patterns)
                    .map(|(w, p)| (w[1] - w[0], p.iter().enumerate().filter(|(_, &on)| on).map(|(i, _)| i).collect()))
                    .collect())
            }
        }
    }

    /// Total activation time δtᵢ of each field.
    pub fn occupancy(&self, k: usize) -> Result<Vec<f64>> {
        let mut occ = vec![0.0; k];
        for (d, active) in self.segments(k)? {
            for i in active {
                occ[i] += d;
            }
        }
        Ok(occ)
    }
}

/// Endpoint of the emulating system from `x_t` under `schedule`.
///
/// Constant fields are advanced in closed form; affine fields by fixed-step
/// RK4 on each segment.
pub fn endpoint_map(family: &SourceFamily, x_t: &[f64], schedule: &ActivationSchedule) -> Result<Vec<f64>> {
    family.check_state(x_t, "state")?;
    let mut x = x_t.to_vec();
    for (dur, active) in schedule.segments(family.len())? {
        if active.is_empty() {
            continue;
        }
        let fields: Vec<&VectorField> = active.iter().map(|&i| &family.fields[i]).collect();
        let rhs = |x: &[f64]| -> Vec<f64> {
            let mut v = vec![0.0; x.len()];
            for f in &fields {
                for (a, b) in v.iter_mut().zip(f.eval(x)) {
                    *a += b;
                }
            }
            v
        };
        if fields.iter().all(|f| f.is_constant()) {
            let v = rhs(&x);
            for (xi, vi) in x.iter_mut().zip(v) {
                *xi += dur * vi;
            }
            continue;
        }
        let stiffness: f64 = fields
            .iter()
            .map(|f| match f {
                VectorField::Affine { m, .. } => m.norm1(),
                VectorField::Constant(_) => 0.0,
            })
            .sum();
        let steps = 32usize.max((dur * stiffness * 64.0).ceil() as usize);
        let h = dur / steps as f64;
        for _ in 0..steps {
            let axpy = |a: &[f64], s: f64, b: &[f64]| a.iter().zip(b).map(|(p, q)| p + s * q).collect::<Vec<_>>();
            let k1 = rhs(&x);
            let k2 = rhs(&axpy(&x, 0.5 * h, &k1));
            let k3 = rhs(&axpy(&x, 0.5 * h, &k2));
            let k4 = rhs(&axpy(&x, h, &k3));
            for i in 0..x.len() {
                x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
        }
    }
    Ok(x)
}

fn require_constant(family: &SourceFamily) -> Result<()> {
    if !family.is_constant() {
        return Err(Error::Input("this codec needs a family of constant fields".into()));
    }
    Ok(())
}

fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q) * (p - q)).sum()
}

/// Greedy one-hot compressor: on each of `segments` uniform slices of `dt`
/// pick the field whose step lands closest to the matching point on the
/// straight line toward `x_t + target_dx`. Ties go to the lowest index.
pub fn onehot_compress(
    family: &SourceFamily,
    x_t: &[f64],
    target_dx: &[f64],
    segments: usize,
    dt: f64,
) -> Result<Vec<usize>> {
    require_constant(family)?;
    family.check_state(x_t, "state")?;
    family.check_state(target_dx, "target increment")?;
    if segments == 0 {
        return Err(Error::Input("need at least one segment".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Input("horizon must be positive".into()));
    }
    let h = dt / segments as f64;
    let vectors: Vec<Vec<f64>> = family.fields.iter().map(|f| f.eval(x_t)).collect();
    let mut acc = vec![0.0; family.dim];
    let mut out = Vec::with_capacity(segments);
    for j in 1..=segments {
        let frac = j as f64 / segments as f64;
        let waypoint: Vec<f64> = target_dx.iter().map(|v| v * frac).collect();
        let mut best = (0, f64::INFINITY);
        for (i, v) in vectors.iter().enumerate() {
            let cand: Vec<f64> = acc.iter().zip(v).map(|(a, b)| a + h * b).collect();
            let d = dist2(&cand, &waypoint);
            if d < best.1 {
                best = (i, d);
            }
        }
        for (a, b) in acc.iter_mut().zip(&vectors[best.0]) {
            *a += h * b;
        }
        out.push(best.0);
    }
    Ok(out)
}

/// Rate of the `(K^N, L)` block code built from one-hot index sequences.
pub fn onehot_code_rate_bits(fields: usize, segments: usize, blocklength: usize) -> f64 {
    segments as f64 / blocklength as f64 * (fields as f64).log2()
}

/// Relative flow times `p` on the simplex and their total `z`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimplexCode {
    p: Vec<f64>,
    z: f64,
}

impl SimplexCode {
    pub fn new(p: Vec<f64>, z: f64) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::Input("empty probability vector".into()));
        }
        if p.iter().any(|&v| !(v >= -SIMPLEX_TOL) || !v.is_finite()) {
            return Err(Error::Input("probabilities must be nonnegative".into()));
        }
        let s: f64 = p.iter().sum();
        if (s - 1.0).abs() > SIMPLEX_TOL * p.len() as f64 {
            return Err(Error::Input(format!("probabilities sum to {s}")));
        }
        if !(z >= 0.0) || !z.is_finite() {
            return Err(Error::Input(format!("normalizing time must be >= 0, got {z}")));
        }
        Ok(SimplexCode { p, z })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn z(&self) -> f64 {
        self.z
    }

    /// Whether the flow fits within a horizon `dt`.
    pub fn within_horizon(&self, dt: f64) -> bool {
        self.z <= dt + 1e-9
    }
}

/// `g(p, Z) = Z Σ Vᵢ(x_t) pᵢ`.
pub fn simplex_decompress(family: &SourceFamily, x_t: &[f64], code: &SimplexCode) -> Result<Vec<f64>> {
    family.check_state(x_t, "state")?;
    if code.p.len() != family.len() {
        return Err(Error::Dimension(format!(
            "code has {} weights for {} fields",
            code.p.len(),
            family.len()
        )));
    }
    let mut out = vec![0.0; family.dim];
    if code.z == 0.0 {
        return Ok(out);
    }
    for (f, &pi) in family.fields.iter().zip(&code.p) {
        if pi == 0.0 {
            continue;
        }
        for (o, v) in out.iter_mut().zip(f.eval(x_t)) {
            *o += code.z * pi * v;
        }
    }
    Ok(out)
}

/// LP compressor for constant families: the minimum total flow time
/// `δt* = argmin ‖δt‖₁` with `Σ Vⱼ δtⱼ = Δx`, `δt ≥ 0`, returned as
/// `(δt*/Z, Z)`.
pub fn simplex_compress(family: &SourceFamily, target_dx: &[f64]) -> Result<SimplexCode> {
    require_constant(family)?;
    simplex_compress_at(family, &vec![0.0; family.dim], target_dx)
}

/// As [`simplex_compress`], with the fields evaluated at `x_t`.
pub fn simplex_compress_at(family: &SourceFamily, x_t: &[f64], target_dx: &[f64]) -> Result<SimplexCode> {
    family.check_state(x_t, "state")?;
    family.check_state(target_dx, "target increment")?;
    let k = family.len();
    if target_dx.iter().all(|&v| v == 0.0) {
        return SimplexCode::new(vec![1.0 / k as f64; k], 0.0);
    }
    let sol = lp::minimize(&vec![1.0; k], &family.field_matrix(x_t), target_dx)?;
    let z: f64 = sol.x.iter().sum();
    if z == 0.0 {
        return SimplexCode::new(vec![1.0 / k as f64; k], 0.0);
    }
    let p: Vec<f64> = sol.x.iter().map(|v| v / z).collect();
    SimplexCode::new(p, z)
}

/// Counts `nᵢ` with `Σ nᵢ = N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerCode {
    counts: Vec<u64>,
    resolution: u64,
}

impl IntegerCode {
    pub fn new(counts: Vec<u64>) -> Result<Self> {
        let resolution: u64 = counts.iter().sum();
        if resolution == 0 {
            return Err(Error::Input("integer code needs a positive total".into()));
        }
        Ok(IntegerCode { counts, resolution })
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn resolution(&self) -> u64 {
        self.resolution
    }

    /// `n / N` as a simplex point.
    pub fn frequencies(&self) -> Vec<f64> {
        self.counts.iter().map(|&c| c as f64 / self.resolution as f64).collect()
    }
}

/// Largest-remainder apportionment of `resolution` among `code.p()`.
pub fn integer_quantize(code: &SimplexCode, resolution: u64) -> Result<IntegerCode> {
    if resolution == 0 {
        return Err(Error::Input("resolution must be at least 1".into()));
    }
    let n = resolution as f64;
    let mut counts: Vec<u64> = code.p.iter().map(|&p| (p.max(0.0) * n).floor() as u64).collect();
    let assigned: u64 = counts.iter().sum();
    let mut left = resolution.saturating_sub(assigned);
    let mut order: Vec<usize> = (0..code.p.len()).collect();
    let frac = |i: usize| code.p[i].max(0.0) * n - counts[i] as f64;
    let fracs: Vec<f64> = order.iter().map(|&i| frac(i)).collect();
    order.sort_by(|&a, &b| fracs[b].total_cmp(&fracs[a]).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        counts[i] += 1;
        left -= 1;
    }
    // floating error can overshoot when Σp is a hair above 1
    let mut total: u64 = counts.iter().sum();
    for &i in order.iter().rev() {
        while total > resolution && counts[i] > 0 {
            counts[i] -= 1;
            total -= 1;
        }
    }
    IntegerCode::new(counts)
}

/// Integer codec: LP compression followed by apportionment.
///
/// With `assume_full_horizon` the decoder uses the sampling interval as the
/// flow time instead of the transmitted `Z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegerCodec {
    pub resolution: u64,
    pub assume_full_horizon: bool,
}

impl IntegerCodec {
    pub fn new(resolution: u64) -> Self {
        IntegerCodec { resolution, assume_full_horizon: false }
    }

    pub fn compress(&self, family: &SourceFamily, x_t: &[f64], dx: &[f64]) -> Result<(IntegerCode, f64)> {
        let code = simplex_compress_at(family, x_t, dx)?;
        Ok((integer_quantize(&code, self.resolution)?, code.z))
    }

    pub fn decompress(
        &self,
        family: &SourceFamily,
        x_t: &[f64],
        code: &IntegerCode,
        z: f64,
        dt: f64,
    ) -> Result<Vec<f64>> {
        let z = if self.assume_full_horizon { dt } else { z };
        simplex_decompress(family, x_t, &SimplexCode::new(code.frequencies(), z)?)
    }

    /// `log₂ C(N+K−1, K−1)`: the number of distinct integer codes, reported
    /// as a diagnostic.
    pub fn codebook_bits(&self, fields: usize) -> f64 {
        let n = self.resolution as f64;
        (1..fields).map(|i| ((n + i as f64) / i as f64).log2()).sum()
    }
}

/// Per-step averaged codes `(p̃, Z̃)` from a training dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct AveragedCodes {
    /// `None` where no trial's increment was compressible.
    pub steps: Vec<Option<SimplexCode>>,
    /// Increments outside the conic hull of the family, skipped.
    pub infeasible: usize,
}

/// Compresses every trial's increment at every step and averages the codes
/// arithmetically over the feasible trials.
pub fn average_codes(dataset: &TrajectoryDataset, family: &SourceFamily) -> Result<AveragedCodes> {
    if dataset.dim() != family.dim() {
        return Err(Error::Dimension(format!(
            "dataset has dimension {}, family has {}",
            dataset.dim(),
            family.dim()
        )));
    }
    let k = family.len();
    let mut infeasible = 0;
    let mut steps = Vec::with_capacity(dataset.steps());
    for step in 0..dataset.steps() {
        let mut p = vec![0.0; k];
        let mut z = 0.0;
        let mut used = 0usize;
        for (dx, x) in dataset.increments(step) {
            match simplex_compress_at(family, x, &dx) {
                Ok(code) => {
                    for (a, b) in p.iter_mut().zip(&code.p) {
                        *a += b;
                    }
                    z += code.z;
                    used += 1;
                }
                Err(Error::Infeasible) => infeasible += 1,
                Err(e) => return Err(e),
            }
        }
        if used == 0 {
            steps.push(None);
            continue;
        }
        let inv = 1.0 / used as f64;
        let mut p: Vec<f64> = p.into_iter().map(|v| v * inv).collect();
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|v| *v /= s);
        steps.push(Some(SimplexCode::new(p, z * inv)?));
    }
    Ok(AveragedCodes { steps, infeasible })
}

/// One emulated path: multinomial draws keyed by `(seed, path, step)`.
/// Steps without a usable code hold the state.
pub fn emulate_path(
    codes: &AveragedCodes,
    family: &SourceFamily,
    x0: &[f64],
    resolution: u64,
    seed: u64,
    path: u64,
) -> Result<Vec<Vec<f64>>> {
    family.check_state(x0, "initial state")?;
    if resolution == 0 {
        return Err(Error::Input("resolution must be at least 1".into()));
    }
    let mut x = x0.to_vec();
    let mut out = Vec::with_capacity(codes.steps.len() + 1);
    out.push(x.clone());
    for (k, code) in codes.steps.iter().enumerate() {
        if let Some(code) = code {
            let counts = multinomial(seed, path, k as u64, resolution, &code.p);
            let draw = SimplexCode::new(IntegerCode::new(counts)?.frequencies(), code.z)?;
            let dx = simplex_decompress(family, &x, &draw)?;
            for (a, b) in x.iter_mut().zip(dx) {
                *a += b;
            }
        }
        out.push(x.clone());
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Emulation {
    pub trajectory: Vec<Vec<f64>>,
    pub codes: AveragedCodes,
}

impl Emulation {
    pub fn infeasible(&self) -> usize {
        self.codes.infeasible
    }

    /// The trajectory as a single-trial dataset.
    pub fn to_dataset(&self, dt: f64, t0: f64) -> Result<TrajectoryDataset> {
        TrajectoryDataset::with_start(dt, t0, vec![self.trajectory.clone()])
    }
}

/// Multinomial emulation of a new trial from a training dataset, starting
/// at the mean of the observed initial states.
pub fn emulate(
    dataset: &TrajectoryDataset,
    family: &SourceFamily,
    resolution: u64,
    seed: u64,
) -> Result<Emulation> {
    let codes = average_codes(dataset, family)?;
    let x0 = initial_mean(dataset);
    let trajectory = emulate_path(&codes, family, &x0, resolution, seed, 0)?;
    Ok(Emulation { trajectory, codes })
}

/// Exact mean and covariance of one emulated increment
/// `Z Σ Vᵢ(x) ñᵢ/N` with `ñ ~ Mult(N, p)`.
pub fn emulated_increment_moments(
    family: &SourceFamily,
    x: &[f64],
    code: &SimplexCode,
    resolution: u64,
) -> Result<(Vec<f64>, Matrix)> {
    family.check_state(x, "state")?;
    if resolution == 0 {
        return Err(Error::Input("resolution must be at least 1".into()));
    }
    let n = family.dim();
    let vs: Vec<Vec<f64>> = family.fields.iter().map(|f| f.eval(x)).collect();
    let mut mean = vec![0.0; n];
    let mut second = Matrix::zeros(n, n);
    for (v, &p) in vs.iter().zip(&code.p) {
        for i in 0..n {
            mean[i] += p * v[i];
            for j in 0..n {
                second[(i, j)] += p * v[i] * v[j];
            }
        }
    }
    let mut cov = second;
    for i in 0..n {
        for j in 0..n {
            cov[(i, j)] = (cov[(i, j)] - mean[i] * mean[j]) * code.z * code.z / resolution as f64;
        }
    }
    Ok((mean.into_iter().map(|m| m * code.z).collect(), cov))
}

pub fn initial_mean(dataset: &TrajectoryDataset) -> Vec<f64> {
    let l = dataset.trials() as f64;
    let mut m = vec![0.0; dataset.dim()];
    for trial in dataset.states() {
        for (a, b) in m.iter_mut().zip(&trial[0]) {
            *a += b / l;
        }
    }
    m
}
