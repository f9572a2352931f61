use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::RealMatrix;

/// Lovász parameter used unless another is requested.
pub const DEFAULT_DELTA: f64 = 0.75;

// Relative pivot size below which the basis is treated as rank deficient.
const RANK_TOL: f64 = 1e-12;

/// Square integer matrix, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    n: usize,
    data: Vec<i64>,
}

impl IntMatrix {
    pub fn identity(n: usize) -> Self {
        let mut data = vec![0; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        Self { n, data }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("integer matrix must be square".into()));
        }
        Ok(Self { n, data: rows.concat() })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.n + j]
    }

    fn add_col_multiple(&mut self, dst: usize, src: usize, k: i64) {
        for i in 0..self.n {
            self.data[i * self.n + dst] += k * self.data[i * self.n + src];
        }
    }

    fn add_row_multiple(&mut self, dst: usize, src: usize, k: i64) {
        for j in 0..self.n {
            self.data[dst * self.n + j] += k * self.data[src * self.n + j];
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.n {
            self.data.swap(i * self.n + a, i * self.n + b);
        }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.n {
            self.data.swap(a * self.n + j, b * self.n + j);
        }
    }

    pub fn to_real(&self) -> RealMatrix {
        RealMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j) as f64)
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::Shape(format!("{0}x{0} times {1}x{1}", self.n, rhs.n)));
        }
        let n = self.n;
        let mut data = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a != 0 {
                    for j in 0..n {
                        data[i * n + j] += a * rhs.get(k, j);
                    }
                }
            }
        }
        Ok(Self { n, data })
    }

    /// Exact determinant (fraction-free Bareiss elimination).
    pub fn det(&self) -> i128 {
        let n = self.n;
        if n == 0 {
            return 1;
        }
        let mut a: Vec<i128> = self.data.iter().map(|&v| v as i128).collect();
        let mut sign = 1;
        let mut prev = 1i128;
        for k in 0..n - 1 {
            if a[k * n + k] == 0 {
                match (k + 1..n).find(|&r| a[r * n + k] != 0) {
                    Some(r) => {
                        for j in 0..n {
                            a.swap(k * n + j, r * n + j);
                        }
                        sign = -sign;
                    }
                    None => return 0,
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    a[i * n + j] = (a[i * n + j] * a[k * n + k] - a[i * n + k] * a[k * n + j]) / prev;
                }
            }
            prev = a[k * n + k];
        }
        sign * a[n * n - 1]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n.max(1))).finish()
    }
}

/// `H_E = Q R` with `Q = H_E T` LLL-reduced and `R = T^{-1}` unimodular.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeReduction {
    pub q: RealMatrix,
    pub r: IntMatrix,
    /// `T = R^{-1}`, the column operations applied to the input basis.
    pub t: IntMatrix,
    pub delta: f64,
}

impl LatticeReduction {
    /// Checks size reduction, the Lovász condition, `|det R| = 1`, `T R = I`
    /// and `Q R = b` (relative tolerance `tol`). Returns the first violation.
    pub fn check(&self, b: &RealMatrix, tol: f64) -> std::result::Result<(), String> {
        let n = self.q.cols();
        let (mu, norms) = gram_schmidt_coefficients(&self.q);
        for k in 1..n {
            for (j, m) in mu[k].iter().enumerate().take(k) {
                if m.abs() > 0.5 + tol {
                    return Err(format!("|mu[{k}][{j}]| = {} exceeds 1/2", m.abs()));
                }
            }
            let lhs = norms[k];
            let rhs = (self.delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1];
            if lhs < rhs - tol * norms[k - 1].max(lhs) {
                return Err(format!("Lovász condition fails at k={k}: {lhs} < {rhs}"));
            }
        }
        if self.r.det().abs() != 1 {
            return Err(format!("det R = {}", self.r.det()));
        }
        if self.t.matmul(&self.r).map_err(|e| e.to_string())? != IntMatrix::identity(n) {
            return Err("T R is not the identity".into());
        }
        let back = self.q.matmul(&self.r.to_real()).map_err(|e| e.to_string())?;
        let scale = b.frobenius_sq().sqrt().max(1.0);
        if back.max_abs_diff(b) > tol * scale {
            return Err(format!("Q R differs from B by {}", back.max_abs_diff(b)));
        }
        Ok(())
    }
}

/// LLL reduction of the columns of `b`.
///
/// Classical form: Gram-Schmidt coefficients from dot products, size
/// reduction of `mu[k][k-1]` before the Lovász test and of the remaining
/// coefficients once it passes, incremental coefficient update on a swap.
/// Rounding is half away from zero. No sign normalisation is applied.
pub fn lll_reduce(b: &RealMatrix, delta: f64) -> Result<LatticeReduction> {
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(Error::Domain(format!("LLL delta must lie in (1/4, 1], got {delta}")));
    }
    let (m, n) = b.shape();
    if n > m {
        return Err(Error::RankDeficient);
    }
    let (mut mu, mut norms) = gram_schmidt_coefficients(b);
    let scale = b.frobenius_sq().max(f64::MIN_POSITIVE);
    if norms.iter().any(|&v| !(v > RANK_TOL * RANK_TOL * scale)) {
        return Err(Error::RankDeficient);
    }
    let mut t = IntMatrix::identity(n);
    let mut t_inv = IntMatrix::identity(n);

    let reduce = |k: usize, j: usize, mu: &mut Vec<Vec<f64>>, t: &mut IntMatrix, t_inv: &mut IntMatrix| {
        let q = mu[k][j].round();
        if q != 0.0 {
            mu[k][j] -= q;
            for l in 0..j {
                mu[k][l] -= q * mu[j][l];
            }
            let q = q as i64;
            t.add_col_multiple(k, j, -q);
            t_inv.add_row_multiple(j, k, q);
        }
    };

    let mut k = 1;
    while k < n {
        reduce(k, k - 1, &mut mu, &mut t, &mut t_inv);
        if norms[k] >= (delta - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            for j in (0..k - 1).rev() {
                reduce(k, j, &mut mu, &mut t, &mut t_inv);
            }
            k += 1;
            continue;
        }
        t.swap_cols(k - 1, k);
        t_inv.swap_rows(k - 1, k);
        for j in 0..k - 1 {
            let tmp = mu[k][j];
            mu[k][j] = mu[k - 1][j];
            mu[k - 1][j] = tmp;
        }
        let m_kk = mu[k][k - 1];
        let big = norms[k] + m_kk * m_kk * norms[k - 1];
        mu[k][k - 1] = m_kk * norms[k - 1] / big;
        norms[k] = norms[k - 1] * norms[k] / big;
        norms[k - 1] = big;
        for i in k + 1..n {
            let tmp = mu[i][k];
            mu[i][k] = mu[i][k - 1] - m_kk * tmp;
            mu[i][k - 1] = tmp + mu[k][k - 1] * mu[i][k];
        }
        k = (k - 1).max(1);
    }
    let q = b.matmul(&t.to_real())?;
    Ok(LatticeReduction { q, r: t_inv, t, delta })
}

/// Gram-Schmidt coefficients `mu[k][j]` and squared norms `|b*_j|^2` of the columns of `b`.
pub fn gram_schmidt_coefficients(b: &RealMatrix) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = b.cols();
    let cols: Vec<Vec<f64>> = (0..n).map(|j| b.column(j)).collect();
    let dot = |a: &[f64], c: &[f64]| a.iter().zip(c).map(|(x, y)| x * y).sum::<f64>();
    let mut stars: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for k in 0..n {
        let mut s = cols[k].clone();
        for j in 0..k {
            mu[k][j] = dot(&cols[k], &stars[j]) / norms[j];
            for (v, w) in s.iter_mut().zip(&stars[j]) {
                *v -= mu[k][j] * w;
            }
        }
        norms.push(dot(&s, &s));
        stars.push(s);
    }
    (mu, norms)
}
