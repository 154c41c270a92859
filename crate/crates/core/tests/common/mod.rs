//! Independent reference implementations for tests. Plain nested vectors and
//! textbook algorithms only; nothing here calls into the crate's kernels.
#![allow(dead_code)]

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sysrate::Matrix;

pub type Dense = Vec<Vec<f64>>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn to_matrix(a: &Dense) -> Matrix {
    Matrix::from_rows(a).unwrap()
}

pub fn from_matrix(m: &Matrix) -> Dense {
    m.to_rows()
}

pub fn eye(n: usize) -> Dense {
    (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect()
}

pub fn mul(a: &Dense, b: &Dense) -> Dense {
    let (n, m, p) = (a.len(), b.len(), b[0].len());
    let mut c = vec![vec![0.0; p]; n];
    for i in 0..n {
        for k in 0..m {
            for j in 0..p {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

pub fn transpose(a: &Dense) -> Dense {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j]).collect()).collect()
}

pub fn add_scaled(a: &Dense, b: &Dense, s: f64) -> Dense {
    a.iter().zip(b).map(|(r, q)| r.iter().zip(q).map(|(x, y)| x + s * y).collect()).collect()
}

pub fn max_abs_diff(a: &Dense, b: &Dense) -> f64 {
    a.iter().flatten().zip(b.iter().flatten()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn max_abs(a: &Dense) -> f64 {
    a.iter().flatten().map(|x| x.abs()).fold(0.0, f64::max)
}

/// Truncated Taylor series; accurate when `‖A h‖` is small.
pub fn taylor_exp(a: &Dense, h: f64, terms: usize) -> Dense {
    let n = a.len();
    let mut out = eye(n);
    let mut term = eye(n);
    for k in 1..=terms {
        term = mul(&term, a).iter().map(|r| r.iter().map(|v| v * h / k as f64).collect()).collect();
        out = add_scaled(&out, &term, 1.0);
    }
    out
}

/// `∫₀^T e^{Aτ} N e^{Aᵀτ} dτ` by the composite trapezoid rule on `points`
/// nodes, stepping the propagator with a Taylor-series `e^{Ah}`.
pub fn gramian_trapezoid(a: &Dense, noise: &Dense, horizon: f64, points: usize) -> Dense {
    let n = a.len();
    let intervals = points - 1;
    let h = horizon / intervals as f64;
    let step = taylor_exp(a, h, 24);
    let mut phi = eye(n);
    let mut acc = vec![vec![0.0; n]; n];
    for k in 0..=intervals {
        let w = if k == 0 || k == intervals { 0.5 * h } else { h };
        let f = mul(&mul(&phi, noise), &transpose(&phi));
        acc = add_scaled(&acc, &f, w);
        phi = mul(&step, &phi);
    }
    acc
}

/// Solves the square system by Gaussian elimination; `None` when singular.
pub fn gauss_solve(a: &Dense, b: &[f64]) -> Option<Vec<f64>> {
    let n = a.len();
    let mut m: Dense = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..=n {
                    m[r][k] -= f * m[c][k];
                }
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

pub fn random_dense(r: &mut ChaCha8Rng, rows: usize, cols: usize, scale: f64) -> Dense {
    (0..rows).map(|_| (0..cols).map(|_| r.random_range(-scale..scale)).collect()).collect()
}

/// Random orthogonal matrix by Gram-Schmidt on a random square matrix.
pub fn random_orthogonal(r: &mut ChaCha8Rng, n: usize) -> Dense {
    let mut q: Dense = Vec::with_capacity(n);
    while q.len() < n {
        let mut v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
        for u in &q {
            let d: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(u).for_each(|(a, b)| *a -= d * b);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-3 {
            q.push(v.into_iter().map(|a| a / norm).collect());
        }
    }
    q
}

/// `B Bᵀ` for a random `B`: positive semidefinite, generically definite.
pub fn random_psd(r: &mut ChaCha8Rng, n: usize) -> Dense {
    let b = random_dense(r, n, n, 1.0);
    mul(&b, &transpose(&b))
}

/// `Q diag(σ²) Qᵀ` with the spectrum returned alongside.
pub fn random_covariance(r: &mut ChaCha8Rng, n: usize) -> (Dense, Vec<f64>) {
    let spectrum: Vec<f64> = (0..n).map(|_| 10f64.powf(r.random_range(-3.0..1.0))).collect();
    let q = random_orthogonal(r, n);
    let d: Dense = (0..n).map(|i| (0..n).map(|j| if i == j { spectrum[i] } else { 0.0 }).collect()).collect();
    let s = mul(&mul(&q, &d), &transpose(&q));
    let sym = (0..n).map(|i| (0..n).map(|j| 0.5 * (s[i][j] + s[j][i])).collect()).collect();
    (sym, spectrum)
}

/// Hurwitz drift `Q T Qᵀ` with `T` block upper triangular: real eigenvalues
/// and `[[a, b], [-b, a]]` pairs on the diagonal. Returns the largest real
/// part of the spectrum.
pub fn random_hurwitz(r: &mut ChaCha8Rng, n: usize) -> (Dense, f64) {
    let mut t = vec![vec![0.0; n]; n];
    let mut max_re = f64::NEG_INFINITY;
    let mut i = 0;
    while i < n {
        let re = -r.random_range(0.1..2.0);
        max_re = max_re.max(re);
        if i + 1 < n && r.random_bool(0.5) {
            let im = r.random_range(0.2..2.0);
            t[i][i] = re;
            t[i + 1][i + 1] = re;
            t[i][i + 1] = im;
            t[i + 1][i] = -im;
            i += 2;
        } else {
            t[i][i] = re;
            i += 1;
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            if t[i][j] == 0.0 && !(j == i + 1 && t[j][i] != 0.0) {
                t[i][j] = r.random_range(-0.5..0.5);
            }
        }
    }
    let q = random_orthogonal(r, n);
    (mul(&mul(&q, &t), &transpose(&q)), max_re)
}

/// Reverse water-filling rate for a known spectrum, by a uniform grid on the
/// water level with linear interpolation inside the bracketing cell.
pub fn water_filling_grid(spectrum: &[f64], distortion: f64, points: usize) -> f64 {
    let total: f64 = spectrum.iter().sum();
    if distortion >= total {
        return 0.0;
    }
    let top = spectrum.iter().copied().fold(0.0, f64::max);
    let used = |theta: f64| spectrum.iter().map(|&s| theta.min(s)).sum::<f64>();
    let mut lo = 0.0;
    let mut hi = top;
    for k in 1..=points {
        let theta = top * k as f64 / points as f64;
        if used(theta) >= distortion {
            lo = top * (k - 1) as f64 / points as f64;
            hi = theta;
            break;
        }
    }
    let (ulo, uhi) = (used(lo), used(hi));
    let theta = lo + (hi - lo) * (distortion - ulo) / (uhi - ulo);
    spectrum.iter().filter(|&&s| s > theta).map(|&s| 0.5 * (s / theta).ln()).sum()
}

/// Minimum `Σ xᵢ` over `V x = b, x ≥ 0` by enumerating basic solutions.
/// `None` when infeasible.
pub fn lp_vertex_min(columns: &[Vec<f64>], b: &[f64]) -> Option<f64> {
    let n = b.len();
    let k = columns.len();
    if b.iter().all(|&v| v == 0.0) {
        return Some(0.0);
    }
    let mut best: Option<f64> = None;
    for mask in 1u32..(1 << k) {
        let idx: Vec<usize> = (0..k).filter(|i| mask & (1 << i) != 0).collect();
        if idx.len() > n {
            continue;
        }
        // Normal equations on the chosen columns, then an exactness check.
        let g: Dense = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| (0..n).map(|r| columns[i][r] * columns[j][r]).sum()).collect())
            .collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| (0..n).map(|r| columns[i][r] * b[r]).sum()).collect();
        let Some(x) = gauss_solve(&g, &rhs) else { continue };
        if x.iter().any(|&v| v < -1e-10) {
            continue;
        }
        let resid = (0..n)
            .map(|r| (idx.iter().zip(&x).map(|(&i, v)| columns[i][r] * v).sum::<f64>() - b[r]).abs())
            .fold(0.0, f64::max);
        if resid > 1e-9 * (1.0 + b.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            continue;
        }
        let obj: f64 = x.iter().sum();
        best = Some(best.map_or(obj, |o: f64| o.min(obj)));
    }
    best
}
