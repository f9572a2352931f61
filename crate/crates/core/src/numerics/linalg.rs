use nalgebra::DMatrix;
use num_complex::Complex64;

use super::matrix::{ComplexMatrix, RealMatrix};
use crate::error::{Error, Result};

/// Relative accuracy the log-determinant is held to against closed forms.
pub const LOGDET_REL_TOL: f64 = 1e-10;
/// Relative accuracy of singular values against Gram eigenvalues.
pub const SINGULAR_VALUE_REL_TOL: f64 = 1e-9;

/// `A^H A`, symmetrized so the result is exactly Hermitian with a real diagonal.
pub fn hermitian_gram(a: &ComplexMatrix) -> ComplexMatrix {
    let n = a.cols();
    let mut g = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in 0..a.rows() {
                acc += a[(k, i)].conj() * a[(k, j)];
            }
            if i == j {
                g[(i, i)] = Complex64::new(acc.re, 0.0);
            } else {
                g[(i, j)] = acc;
                g[(j, i)] = acc.conj();
            }
        }
    }
    g
}

/// Natural-log determinant of a Hermitian positive definite matrix via Cholesky.
pub fn logdet_hermitian_psd(g: &ComplexMatrix) -> Result<f64> {
    let n = g.rows();
    if n != g.cols() {
        return Err(Error::Shape(format!("{}x{} is not square", g.rows(), g.cols())));
    }
    // lower factor, row-major
    let mut l = vec![Complex64::new(0.0, 0.0); n * n];
    let mut logdet = 0.0;
    for j in 0..n {
        let mut d = g[(j, j)].re;
        for k in 0..j {
            d -= l[j * n + k].norm_sqr();
        }
        if !(d > 0.0) {
            return Err(Error::NonPositiveDefinite { index: j, pivot: d });
        }
        let ljj = d.sqrt();
        l[j * n + j] = Complex64::new(ljj, 0.0);
        logdet += 2.0 * ljj.ln();
        for i in j + 1..n {
            let mut s = g[(i, j)];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k].conj();
            }
            l[i * n + j] = s / ljj;
        }
    }
    Ok(logdet)
}

/// Matrices whose singular values can be computed.
pub trait SingularValues {
    /// Singular values in descending order.
    fn singular_values(&self) -> Vec<f64>;
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

impl SingularValues for ComplexMatrix {
    fn singular_values(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.rows(), self.cols(), self.as_slice());
        sorted_desc(m.singular_values().iter().map(|s| s.max(0.0)).collect())
    }
}

impl SingularValues for RealMatrix {
    fn singular_values(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.rows(), self.cols(), self.as_slice());
        sorted_desc(m.singular_values().iter().map(|s| s.max(0.0)).collect())
    }
}

pub fn singular_values<M: SingularValues + ?Sized>(a: &M) -> Vec<f64> {
    a.singular_values()
}

/// Householder QR of a tall real matrix, kept for repeated least-squares solves.
#[derive(Debug, Clone)]
pub struct HouseholderQr {
    rows: usize,
    cols: usize,
    // reflector vectors stored below the diagonal, R on and above it
    qr: Vec<f64>,
    tau: Vec<f64>,
    rdiag: Vec<f64>,
}

impl HouseholderQr {
    /// Factors `a`; fails with `RankDeficient` when a column is numerically dependent.
    pub fn new(a: &RealMatrix) -> Result<Self> {
        let (m, n) = a.shape();
        if m < n {
            return Err(Error::RankDeficient);
        }
        let mut qr = a.as_slice().to_vec();
        let mut tau = vec![0.0; n];
        let mut rdiag = vec![0.0; n];
        let scale = a.as_slice().iter().fold(0.0f64, |s, v| s.max(v.abs()));
        let tol = scale * (m.max(n) as f64) * f64::EPSILON * 16.0;
        for k in 0..n {
            let norm = (k..m).map(|i| qr[i * n + k].powi(2)).sum::<f64>().sqrt();
            if norm <= tol {
                return Err(Error::RankDeficient);
            }
            let alpha = if qr[k * n + k] > 0.0 { -norm } else { norm };
            let v0 = qr[k * n + k] - alpha;
            // v = x - alpha e1 normalised so v[0] = 1
            for i in k + 1..m {
                qr[i * n + k] /= v0;
            }
            tau[k] = -v0 / alpha;
            rdiag[k] = alpha;
            for j in k + 1..n {
                let mut s = qr[k * n + j];
                for i in k + 1..m {
                    s += qr[i * n + k] * qr[i * n + j];
                }
                s *= tau[k];
                qr[k * n + j] -= s;
                for i in k + 1..m {
                    qr[i * n + j] -= s * qr[i * n + k];
                }
            }
        }
        Ok(Self { rows: m, cols: n, qr, tau, rdiag })
    }

    /// Least-squares solution of `a x = b`.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let (m, n) = (self.rows, self.cols);
        if b.len() != m {
            return Err(Error::Shape(format!("rhs of length {} against {m} rows", b.len())));
        }
        let mut y = b.to_vec();
        for k in 0..n {
            let mut s = y[k];
            for i in k + 1..m {
                s += self.qr[i * n + k] * y[i];
            }
            s *= self.tau[k];
            y[k] -= s;
            for i in k + 1..m {
                y[i] -= s * self.qr[i * n + k];
            }
        }
        let mut x = vec![0.0; n];
        for k in (0..n).rev() {
            let mut s = y[k];
            for j in k + 1..n {
                s -= self.qr[k * n + j] * x[j];
            }
            x[k] = s / self.rdiag[k];
        }
        Ok(x)
    }
}

/// One-shot least-squares solve.
pub fn lstsq(a: &RealMatrix, b: &[f64]) -> Result<Vec<f64>> {
    HouseholderQr::new(a)?.solve(b)
}

/// Inverse of a small complex square matrix by Gauss-Jordan with partial pivoting.
pub fn invert_complex(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::Shape("inverse of a non-square matrix".into()));
    }
    let mut m = a.clone();
    let mut inv = ComplexMatrix::identity(n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[(i, col)].norm().total_cmp(&m[(j, col)].norm()))
            .unwrap();
        let p = m[(piv, col)];
        if p.norm() < 1e-300 {
            return Err(Error::Singular(0.0));
        }
        if piv != col {
            for j in 0..n {
                let t = m[(col, j)];
                m[(col, j)] = m[(piv, j)];
                m[(piv, j)] = t;
                let t = inv[(col, j)];
                inv[(col, j)] = inv[(piv, j)];
                inv[(piv, j)] = t;
            }
        }
        for j in 0..n {
            m[(col, j)] /= p;
            inv[(col, j)] /= p;
        }
        for i in 0..n {
            if i == col {
                continue;
            }
            let f = m[(i, col)];
            if f == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                let (mv, iv) = (m[(col, j)], inv[(col, j)]);
                m[(i, j)] -= f * mv;
                inv[(i, j)] -= f * iv;
            }
        }
    }
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_complex(rng: &mut ChaCha8Rng, r: usize, k: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(r, k, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    #[test]
    fn gram_of_identity_is_identity() {
        let g = hermitian_gram(&ComplexMatrix::identity(2));
        assert_eq!(g, ComplexMatrix::identity(2));
    }

    #[test]
    fn gram_of_alamouti_pair_is_diagonal() {
        let a = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(1.0, 0.0)]])
            .unwrap();
        let g = hermitian_gram(&a);
        let expected = ComplexMatrix::identity(2).scale(2.0);
        assert!(g.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn gram_matches_naive_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_complex(&mut rng, 3, 2);
        let g = hermitian_gram(&a);
        for i in 0..2 {
            for j in 0..2 {
                let mut s = c(0.0, 0.0);
                for k in 0..3 {
                    s += a[(k, i)].conj() * a[(k, j)];
                }
                assert!((g[(i, j)] - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn logdet_closed_forms() {
        assert_eq!(logdet_hermitian_psd(&ComplexMatrix::identity(3)).unwrap(), 0.0);
        let d = ComplexMatrix::from_rows(&[vec![c(2.0, 0.0), c(0.0, 0.0)], vec![c(0.0, 0.0), c(8.0, 0.0)]])
            .unwrap();
        assert_relative_eq!(logdet_hermitian_psd(&d).unwrap(), 16f64.ln(), max_relative = LOGDET_REL_TOL);
        // 2x2 Hermitian: det = ad - |b|^2
        let h = ComplexMatrix::from_rows(&[vec![c(3.0, 0.0), c(1.0, 2.0)], vec![c(1.0, -2.0), c(4.0, 0.0)]])
            .unwrap();
        assert_relative_eq!(logdet_hermitian_psd(&h).unwrap(), 7f64.ln(), max_relative = LOGDET_REL_TOL);
    }

    #[test]
    fn logdet_matches_eigenvalue_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_complex(&mut rng, 5, 4);
            let g = hermitian_gram(&a).identity_plus_scaled(1.0).unwrap();
            let oracle: f64 = DMatrix::from_row_slice(4, 4, g.as_slice())
                .symmetric_eigenvalues()
                .iter()
                .map(|l| l.ln())
                .sum();
            assert_relative_eq!(logdet_hermitian_psd(&g).unwrap(), oracle, max_relative = 1e-9);
        }
    }

    #[test]
    fn logdet_rejects_indefinite() {
        let m = ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(2.0, 0.0), c(1.0, 0.0)]])
            .unwrap();
        assert!(matches!(logdet_hermitian_psd(&m), Err(Error::NonPositiveDefinite { index: 1, .. })));
    }

    #[test]
    fn singular_value_examples() {
        let d = RealMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 3.0]]).unwrap();
        let s = d.singular_values();
        assert_relative_eq!(s[0], 3.0, max_relative = 1e-12);
        assert_relative_eq!(s[1], 1.0, max_relative = 1e-12);
        let rot = RealMatrix::from_rows(&[vec![0.0, 1.0], vec![-1.0, 0.0]]).unwrap();
        for v in rot.singular_values() {
            assert_relative_eq!(v, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn squared_singular_values_are_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_complex(&mut rng, 6, 4);
        let s = a.singular_values();
        let mut eig: Vec<f64> = DMatrix::from_row_slice(4, 4, hermitian_gram(&a).as_slice())
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        eig.sort_by(|x, y| y.total_cmp(x));
        for (sv, l) in s.iter().zip(&eig) {
            assert_relative_eq!(sv * sv, *l, max_relative = SINGULAR_VALUE_REL_TOL);
        }
    }

    #[test]
    fn lstsq_recovers_exact_solution() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 7.0]]).unwrap();
        let x = [0.5, -1.25];
        let b = a.mul_vec(&x).unwrap();
        let sol = lstsq(&a, &b).unwrap();
        assert!((sol[0] - x[0]).abs() < 1e-12 && (sol[1] - x[1]).abs() < 1e-12);
    }

    #[test]
    fn lstsq_detects_rank_deficiency() {
        let a = RealMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(lstsq(&a, &[1.0, 1.0]).unwrap_err(), Error::RankDeficient);
    }

    #[test]
    fn complex_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = random_complex(&mut rng, 3, 3);
        let p = a.matmul(&invert_complex(&a).unwrap()).unwrap();
        assert!(p.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }
}
