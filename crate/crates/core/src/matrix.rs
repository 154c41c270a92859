//! Dense small-matrix kernel.
//!
//! Everything here is sized for desk-scale problems (n up to about 64) and
//! written for clarity: row-major storage, partial-pivoting LU, cyclic Jacobi
//! for symmetric eigenproblems, scaling-and-squaring Padé exponentials and a
//! Kronecker-vectorized Lyapunov solver.

use std::fmt;
use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};

/// Relative pivot threshold below which LU reports a singular matrix.
pub const LU_PIVOT_TOL: f64 = 1e-13;
/// Jacobi stops once the off-diagonal Frobenius norm is below this times ‖S‖_F.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Inputs to [`sym_eig`] must be symmetric to within this (relative) tolerance.
pub const SYMMETRY_TOL: f64 = 1e-9;
/// 1-norm bound for the degree-13 Padé approximant.
pub const PADE13_THETA: f64 = 5.371920351148152;

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

impl Index<(usize, usize)> for Matrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for Matrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Matrix {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite values.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!("empty {rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("matrix entries must be finite".into()));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::Dimension("ragged rows".into()));
        }
        Matrix::new(r, c, rows.concat())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Matrix::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> f64 {
        self.diagonal().iter().sum()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.mul_unchecked(other))
    }

    pub(crate) fn mul_unchecked(&self, other: &Matrix) -> Matrix {
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} for {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|v| v * s).collect(),
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// `(S + Sᵀ) / 2`.
    pub fn symmetrize(&self) -> Matrix {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let v = 0.5 * (self[(i, j)] + self[(j, i)]);
                s[(i, j)] = v;
                s[(j, i)] = v;
            }
        }
        s
    }

    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        worst
    }

    fn require_square(&self, what: &str) -> Result<usize> {
        if !self.is_square() {
            return Err(Error::Dimension(format!(
                "{what} needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rows)
    }

    fn require_symmetric(&self, what: &str) -> Result<usize> {
        let n = self.require_square(what)?;
        if self.asymmetry() > SYMMETRY_TOL * self.max_abs().max(1.0) {
            return Err(Error::Input(format!("{what} needs a symmetric matrix")));
        }
        Ok(n)
    }
}

/// LU factorization with partial pivoting, `P·A = L·U` stored compactly.
#[derive(Debug, Clone)]
pub struct Lu {
    lu: Matrix,
    perm: Vec<usize>,
}

impl Lu {
    pub fn factor(a: &Matrix) -> Result<Lu> {
        let n = a.require_square("LU")?;
        let tol = LU_PIVOT_TOL * a.max_abs();
        let mut lu = a.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let (p, pivot) = (k..n)
                .map(|i| (i, lu[(i, k)].abs()))
                .fold((k, -1.0), |best, c| if c.1 > best.1 { c } else { best });
            if pivot <= tol || pivot == 0.0 {
                return Err(Error::SingularMatrix);
            }
            if p != k {
                for j in 0..n {
                    lu.data.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let d = lu[(k, k)];
            for i in (k + 1)..n {
                let f = lu[(i, k)] / d;
                lu[(i, k)] = f;
                if f == 0.0 {
                    continue;
                }
                for j in (k + 1)..n {
                    lu.data[i * n + j] -= f * lu.data[k * n + j];
                }
            }
        }
        Ok(Lu { lu, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.rows;
        if b.len() != n {
            return Err(Error::Dimension(format!("rhs length {} for order {n}", b.len())));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = ((i + 1)..n).map(|j| self.lu[(i, j)] * x[j]).sum();
            x[i] = (x[i] - s) / self.lu[(i, i)];
        }
        Ok(x)
    }

    pub fn solve_matrix(&self, b: &Matrix) -> Result<Matrix> {
        let mut out = Matrix::zeros(b.rows, b.cols);
        for j in 0..b.cols {
            let x = self.solve(&b.column(j))?;
            for (i, v) in x.into_iter().enumerate() {
                out[(i, j)] = v;
            }
        }
        Ok(out)
    }
}

/// Solves `A x = b` by LU with partial pivoting.
pub fn lu_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>> {
    Lu::factor(a)?.solve(b)
}

/// `exp(M t)` by scaling and squaring with a degree-13 Padé approximant.
pub fn mat_exp(m: &Matrix, t: f64) -> Result<Matrix> {
    let n = m.require_square("matrix exponential")?;
    if !t.is_finite() {
        return Err(Error::Input("exponential time must be finite".into()));
    }
    let a = m.scale(t);
    let norm = a.norm1();
    if norm == 0.0 {
        return Ok(Matrix::identity(n));
    }
    let s = if norm > PADE13_THETA {
        (norm / PADE13_THETA).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let a = a.scale(0.5f64.powi(s));

    let id = Matrix::identity(n);
    let a2 = a.mul_unchecked(&a);
    let a4 = a2.mul_unchecked(&a2);
    let a6 = a4.mul_unchecked(&a2);
    let b = &PADE13;
    let lin = |c6: f64, c4: f64, c2: f64, c0: f64| -> Matrix {
        let mut out = Matrix::zeros(n, n);
        for k in 0..n * n {
            out.data[k] = c6 * a6.data[k] + c4 * a4.data[k] + c2 * a2.data[k] + c0 * id.data[k];
        }
        out
    };
    let u_inner = a6.mul_unchecked(&lin(b[13], b[11], b[9], 0.0)).add(&lin(b[7], b[5], b[3], b[1]))?;
    let u = a.mul_unchecked(&u_inner);
    let v = a6.mul_unchecked(&lin(b[12], b[10], b[8], 0.0)).add(&lin(b[6], b[4], b[2], b[0]))?;

    let p = v.add(&u)?;
    let q = v.sub(&u)?;
    let mut r = Lu::factor(&q)?.solve_matrix(&p)?;
    for _ in 0..s {
        r = r.mul_unchecked(&r);
    }
    if r.data.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("matrix exponential overflowed".into()));
    }
    Ok(r)
}

/// Eigen-decomposition of a symmetric matrix; eigenvalues sorted descending,
/// column `i` of `vectors` pairs with `values[i]`.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Matrix,
}

impl SymmetricEigen {
    /// `Q Λ Qᵀ`.
    pub fn reconstruct(&self) -> Matrix {
        let n = self.values.len();
        let mut out = Matrix::zeros(n, n);
        for k in 0..n {
            let lam = self.values[k];
            for i in 0..n {
                let qi = self.vectors[(i, k)] * lam;
                for j in 0..n {
                    out[(i, j)] += qi * self.vectors[(j, k)];
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi eigensolver for symmetric matrices.
pub fn sym_eig(s: &Matrix) -> Result<SymmetricEigen> {
    let n = s.require_symmetric("symmetric eigendecomposition")?;
    let mut a = s.symmetrize();
    let mut v = Matrix::identity(n);
    let target = JACOBI_TOL * a.frobenius();

    let off = |a: &Matrix| -> f64 {
        let mut sum = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    sum += a[(i, j)] * a[(i, j)];
                }
            }
        }
        sum.sqrt()
    };

    let mut converged = off(&a) <= target;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[(q, q)] - a[(p, p)]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - sn * vkq;
                    v[(k, q)] = sn * vkp + c * vkq;
                }
            }
        }
        converged = off(&a) <= target;
    }
    if !converged {
        return Err(Error::NotConverged(JACOBI_MAX_SWEEPS));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let values = order.iter().map(|&i| a[(i, i)]).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        for k in 0..n {
            vectors[(k, dst)] = v[(k, src)];
        }
    }
    Ok(SymmetricEigen { values, vectors })
}

/// Lower Cholesky factor of a symmetric positive-definite matrix.
pub fn cholesky(s: &Matrix) -> Result<Matrix> {
    let n = s.require_symmetric("Cholesky")?;
    let mut l = Matrix::zeros(n, n);
    for j in 0..n {
        let d = s[(j, j)] - (0..j).map(|k| l[(j, k)] * l[(j, k)]).sum::<f64>();
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in (j + 1)..n {
            let v = s[(i, j)] - (0..j).map(|k| l[(i, k)] * l[(j, k)]).sum::<f64>();
            l[(i, j)] = v / d;
        }
    }
    Ok(l)
}

/// `ln det S` for symmetric positive-definite `S`, via Cholesky.
pub fn logdet_psd(s: &Matrix) -> Result<f64> {
    let l = cholesky(s)?;
    Ok(2.0 * l.diagonal().iter().map(|d| d.ln()).sum::<f64>())
}

/// Solves `A W + W Aᵀ + N = 0` through the Kronecker system
/// `(I ⊗ A + A ⊗ I) vec(W) = −vec(N)`.
///
/// A singular Kronecker operator (some pair of eigenvalues of `A` sums to
/// zero) is reported as [`Error::NoEquilibrium`].
pub fn lyapunov_solve(a: &Matrix, noise: &Matrix) -> Result<Matrix> {
    let n = a.require_square("Lyapunov solve")?;
    if noise.rows != n || noise.cols != n {
        return Err(Error::Dimension(format!(
            "noise is {}x{}, drift is {n}x{n}",
            noise.rows, noise.cols
        )));
    }
    let m = n * n;
    // column-major vec: index of W[i,j] is j*n + i
    let mut k = Matrix::zeros(m, m);
    for j in 0..n {
        for i in 0..n {
            let row = j * n + i;
            // (A W)[i,j] = Σ_l A[i,l] W[l,j]
            for l in 0..n {
                k[(row, j * n + l)] += a[(i, l)];
            }
            // (W Aᵀ)[i,j] = Σ_l W[i,l] A[j,l]
            for l in 0..n {
                k[(row, l * n + i)] += a[(j, l)];
            }
        }
    }
    let mut rhs = vec![0.0; m];
    for j in 0..n {
        for i in 0..n {
            rhs[j * n + i] = -noise[(i, j)];
        }
    }
    let lu = match Lu::factor(&k) {
        Ok(lu) => lu,
        Err(Error::SingularMatrix) => return Err(Error::NoEquilibrium),
        Err(e) => return Err(e),
    };
    let x = lu.solve(&rhs)?;
    let mut w = Matrix::zeros(n, n);
    for j in 0..n {
        for i in 0..n {
            w[(i, j)] = x[j * n + i];
        }
    }
    Ok(w.symmetrize())
}
