//! Dense two-phase primal simplex for `min cᵀx  s.t.  A x = b, x ≥ 0`.
//!
//! Bland's rule picks both the entering and the leaving variable, so the
//! method cannot cycle on degenerate vertices.

use crate::error::{Error, Result};
use crate::matrix::{lu_solve, Matrix};

/// Phase one declares infeasibility when its optimum exceeds this, scaled by
/// `max(1, ‖b‖∞)`.
pub const FEASIBILITY_TOL: f64 = 1e-9;
const COST_EPS: f64 = 1e-11;
const PIVOT_EPS: f64 = 1e-12;
const MAX_PIVOTS: usize = 50_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    /// Indices of the basic columns that belong to the original problem.
    pub basis: Vec<usize>,
}

struct Tableau {
    rows: usize,
    width: usize,
    /// `rows + 1` rows; the last one is the reduced-cost row. The last column
    /// is the right-hand side.
    t: Vec<f64>,
    basis: Vec<usize>,
}

impl Tableau {
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * self.width + j]
    }

    fn rhs(&self, i: usize) -> f64 {
        self.at(i, self.width - 1)
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        for j in 0..w {
            self.t[row * w + j] /= p;
        }
        for i in 0..=self.rows {
            if i == row {
                continue;
            }
            let f = self.at(i, col);
            if f == 0.0 {
                continue;
            }
            for j in 0..w {
                self.t[i * w + j] -= f * self.t[row * w + j];
            }
        }
        self.basis[row] = col;
    }

    /// Runs Bland pivots over columns `0..allowed` until optimal.
    fn optimize(&mut self, allowed: usize) -> Result<()> {
        let obj = self.rows;
        for _ in 0..MAX_PIVOTS {
            let Some(col) = (0..allowed).find(|&j| self.at(obj, j) < -COST_EPS) else {
                return Ok(());
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > PIVOT_EPS {
                    let ratio = self.rhs(i) / a;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-15 * br.abs().max(1.0)
                                || (ratio <= br + 1e-15 * br.abs().max(1.0) && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, _)) = best else {
                return Err(Error::Unbounded);
            };
            self.pivot(row, col);
        }
        Err(Error::Input("simplex pivot limit reached".into()))
    }
}

/// Minimizes `cᵀx` subject to `A x = b`, `x ≥ 0`.
pub fn minimize(c: &[f64], a: &Matrix, b: &[f64]) -> Result<LpSolution> {
    let (m, k) = (a.rows(), a.cols());
    if c.len() != k || b.len() != m {
        return Err(Error::Dimension(format!(
            "LP with {m}x{k} constraints, {} costs and {} right-hand sides",
            c.len(),
            b.len()
        )));
    }
    if c.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::Input("LP data must be finite".into()));
    }

    let width = k + m + 1;
    let mut t = vec![0.0; (m + 1) * width];
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..k {
            t[i * width + j] = sign * a[(i, j)];
        }
        t[i * width + k + i] = 1.0;
        t[i * width + width - 1] = sign * b[i];
    }
    // phase one: minimize the sum of artificials
    for j in 0..k {
        t[m * width + j] = -(0..m).map(|i| t[i * width + j]).sum::<f64>();
    }
    t[m * width + width - 1] = -(0..m).map(|i| t[i * width + width - 1]).sum::<f64>();
    let mut tab = Tableau { rows: m, width, t, basis: (k..k + m).collect() };
    tab.optimize(k + m)?;

    let scale = b.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    if -tab.rhs(m) > FEASIBILITY_TOL * scale {
        return Err(Error::Infeasible);
    }
    // drive artificials out of the basis where an original column can replace them
    for i in 0..m {
        if tab.basis[i] >= k {
            if let Some(j) = (0..k).find(|&j| tab.at(i, j).abs() > 1e-9) {
                tab.pivot(i, j);
            }
        }
    }

    // phase two
    for j in 0..width {
        let mut r = if j < k { c[j] } else { 0.0 };
        if j == width - 1 {
            r = 0.0;
        }
        for i in 0..m {
            let cb = if tab.basis[i] < k { c[tab.basis[i]] } else { 0.0 };
            r -= cb * tab.at(i, j);
        }
        tab.t[m * width + j] = r;
    }
    tab.optimize(k)?;

    let mut x = vec![0.0; k];
    for i in 0..m {
        if tab.basis[i] < k {
            x[tab.basis[i]] = tab.rhs(i).max(0.0);
        }
    }
    let basis: Vec<usize> = tab.basis.iter().copied().filter(|&j| j < k).collect();

    // re-solve the square basis system to shed accumulated pivoting error
    if basis.len() == m {
        let mut bm = Matrix::zeros(m, m);
        for (col, &j) in basis.iter().enumerate() {
            for i in 0..m {
                bm[(i, col)] = a[(i, j)];
            }
        }
        if let Ok(xb) = lu_solve(&bm, b) {
            if xb.iter().all(|&v| v >= -1e-9) {
                for (&j, v) in basis.iter().zip(xb) {
                    x[j] = v.max(0.0);
                }
            }
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok(LpSolution { x, objective, basis })
}
