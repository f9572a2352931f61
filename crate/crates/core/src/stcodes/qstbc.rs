use super::{EquivalentChannel, SchemeKind};
use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::numerics::{invert_complex, Complex64, ComplexMatrix};

/// Equivalent channel of the four-antenna quasi-orthogonal code. Per receive
/// antenna the block rows are
/// `( h1,   h2,   h3,   h4 )`, `(-h2*,  h1*, -h4*,  h3*)`,
/// `(-h3,   h4,   h1,  -h2 )`, `(-h4*, -h3*,  h2*,  h1*)`.
pub fn equivalent_channel_qstbc(h: &ChannelMatrix) -> Result<EquivalentChannel> {
    if h.n_t() != 4 {
        return Err(Error::Shape(format!("QSTBC needs n_t = 4, got {}", h.n_t())));
    }
    let n_r = h.n_r();
    let mut rows = Vec::with_capacity(4 * n_r);
    for i in 0..n_r {
        let [h1, h2, h3, h4] = [0, 1, 2, 3].map(|j| h.gain(i, j));
        rows.push(vec![h1, h2, h3, h4]);
        rows.push(vec![-h2.conj(), h1.conj(), -h4.conj(), h3.conj()]);
        rows.push(vec![-h3, h4, h1, -h2]);
        rows.push(vec![-h4.conj(), -h3.conj(), h2.conj(), h1.conj()]);
    }
    Ok(EquivalentChannel {
        scheme: SchemeKind::Qstbc4,
        complex: ComplexMatrix::from_rows(&rows)?,
        conjugated_slots: vec![1, 3],
        noise_gain: 1.0,
    })
}

/// Matched-filter plus whitening split of the QSTBC model into two
/// independent 2x2 systems sharing `H_E = [[beta, j beta], [eps, -j eps]]`:
/// one in `(x1, x3)`, the other in `(x4, x2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct QstbcDecomposition {
    pub beta: f64,
    pub epsilon: f64,
    pub lambda: f64,
    pub alpha: f64,
    pub h_eq: ComplexMatrix,
    equivalent: ComplexMatrix,
}

/// Symbol indices of the odd subsystem, in subsystem order.
pub const ODD_SYMBOLS: [usize; 2] = [0, 2];
/// Symbol indices of the even subsystem, in subsystem order.
pub const EVEN_SYMBOLS: [usize; 2] = [3, 1];

pub fn qstbc_decompose(h: &ChannelMatrix) -> Result<QstbcDecomposition> {
    let eq = equivalent_channel_qstbc(h)?;
    let lambda = h.frobenius_sq();
    let alpha: f64 = (0..h.n_r())
        .map(|i| {
            let t = h.gain(i, 0).conj() * h.gain(i, 2) + h.gain(i, 3).conj() * h.gain(i, 1);
            2.0 * t.im
        })
        .sum();
    let beta = ((lambda + alpha) / 2.0).max(0.0).sqrt();
    let epsilon = ((lambda - alpha) / 2.0).max(0.0).sqrt();
    let j = Complex64::new(0.0, 1.0);
    let h_eq = ComplexMatrix::from_rows(&[
        vec![Complex64::new(beta, 0.0), j * beta],
        vec![Complex64::new(epsilon, 0.0), -j * epsilon],
    ])?;
    Ok(QstbcDecomposition { beta, epsilon, lambda, alpha, h_eq, equivalent: eq.complex })
}

impl QstbcDecomposition {
    /// Full `4 n_r x 4` equivalent channel the decomposition was built from.
    pub fn equivalent(&self) -> &ComplexMatrix {
        &self.equivalent
    }

    /// Whitened 2-dim outputs `(y_odd, y_even)` of the stacked receive vector.
    ///
    /// `y_odd = H_E (x1, x3) + w_o`, `y_even = H_E (x4, x2) + w_e` with `w`
    /// white and of the same per-entry variance as the input noise.
    pub fn split(&self, y_q: &[Complex64]) -> Result<([Complex64; 2], [Complex64; 2])> {
        if y_q.len() != self.equivalent.rows() {
            return Err(Error::Shape(format!("receive vector of length {} against {} rows", y_q.len(), self.equivalent.rows())));
        }
        let whiten = invert_complex(&self.h_eq.adjoint()).map_err(|_| Error::Singular(self.epsilon.min(self.beta)))?;
        let project = |cols: [usize; 2]| -> [Complex64; 2] {
            let mut z = [Complex64::new(0.0, 0.0); 2];
            for (k, &c) in cols.iter().enumerate() {
                z[k] = (0..y_q.len()).map(|r| self.equivalent[(r, c)].conj() * y_q[r]).sum();
            }
            [
                whiten[(0, 0)] * z[0] + whiten[(0, 1)] * z[1],
                whiten[(1, 0)] * z[0] + whiten[(1, 1)] * z[1],
            ]
        };
        Ok((project(ODD_SYMBOLS), project(EVEN_SYMBOLS)))
    }

    /// Reassembles `(x1, x2, x3, x4)` from the subsystem decisions.
    pub fn merge(odd: [Complex64; 2], even: [Complex64; 2]) -> [Complex64; 4] {
        let mut x = [Complex64::new(0.0, 0.0); 4];
        for k in 0..2 {
            x[ODD_SYMBOLS[k]] = odd[k];
            x[EVEN_SYMBOLS[k]] = even[k];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, trial_rng, StreamPurpose};
    use crate::numerics::hermitian_gram;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit_first_gain() -> ChannelMatrix {
        ChannelMatrix::from_matrix(
            ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]]).unwrap(),
        )
    }

    #[test]
    fn unit_first_gain_gives_identity() {
        let eq = equivalent_channel_qstbc(&unit_first_gain()).unwrap();
        assert_eq!(eq.complex, ComplexMatrix::identity(4));
        let zero = ChannelMatrix::from_matrix(ComplexMatrix::zeros(2, 4));
        assert_eq!(equivalent_channel_qstbc(&zero).unwrap().complex, ComplexMatrix::zeros(8, 4));
    }

    #[test]
    fn decomposition_of_unit_first_gain() {
        let d = qstbc_decompose(&unit_first_gain()).unwrap();
        assert_eq!((d.lambda, d.alpha), (1.0, 0.0));
        assert!((d.beta - 0.5f64.sqrt()).abs() < 1e-15 && (d.epsilon - 0.5f64.sqrt()).abs() < 1e-15);
        let zero = qstbc_decompose(&ChannelMatrix::from_matrix(ComplexMatrix::zeros(1, 4))).unwrap();
        assert_eq!((zero.beta, zero.epsilon, zero.lambda, zero.alpha), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn column_norms_equal_lambda_and_gram_matches_factor() {
        let mut rng = trial_rng(2, 0, StreamPurpose::Channel);
        for _ in 0..50 {
            let h = ChannelMatrix::random(3, 4, &mut rng);
            let d = qstbc_decompose(&h).unwrap();
            let g = hermitian_gram(d.equivalent());
            for k in 0..4 {
                assert!((g[(k, k)].re - d.lambda).abs() < 1e-10);
            }
            assert!((d.beta.powi(2) + d.epsilon.powi(2) - d.lambda).abs() < 1e-12);
            let f = hermitian_gram(&d.h_eq);
            for (sub, cols) in [(0, ODD_SYMBOLS), (1, EVEN_SYMBOLS)] {
                let block = g.select_rows(&cols).select_cols(&cols);
                assert!(block.max_abs_diff(&f) < 1e-10, "subsystem {sub}");
            }
            // odd and even symbols decouple
            for a in ODD_SYMBOLS {
                for b in EVEN_SYMBOLS {
                    assert!(g[(a, b)].norm() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn split_yields_whitened_subsystems() {
        let mut rng = trial_rng(4, 0, StreamPurpose::Channel);
        let h = ChannelMatrix::random(2, 4, &mut rng);
        let d = qstbc_decompose(&h).unwrap();
        let x: Vec<Complex64> = (0..4).map(|_| complex_gaussian(&mut rng)).collect();
        let y = d.equivalent().mul_vec(&x).unwrap();
        let (yo, ye) = d.split(&y).unwrap();
        let expect_o = d.h_eq.mul_vec(&[x[0], x[2]]).unwrap();
        let expect_e = d.h_eq.mul_vec(&[x[3], x[1]]).unwrap();
        for k in 0..2 {
            assert!((yo[k] - expect_o[k]).norm() < 1e-10);
            assert!((ye[k] - expect_e[k]).norm() < 1e-10);
        }
        assert_eq!(QstbcDecomposition::merge([x[0], x[2]], [x[3], x[1]]).to_vec(), x);
    }

    #[test]
    fn whitened_noise_keeps_variance() {
        let mut rng = trial_rng(6, 0, StreamPurpose::Channel);
        let h = ChannelMatrix::random(2, 4, &mut rng);
        let d = qstbc_decompose(&h).unwrap();
        let n = 20_000;
        let mut acc = [[Complex64::new(0.0, 0.0); 2]; 2];
        for _ in 0..n {
            let w: Vec<Complex64> = (0..8).map(|_| complex_gaussian(&mut rng)).collect();
            let (wo, _) = d.split(&w).unwrap();
            for a in 0..2 {
                for b in 0..2 {
                    acc[a][b] += wo[a] * wo[b].conj();
                }
            }
        }
        assert!((acc[0][0].re / n as f64 - 1.0).abs() < 0.05);
        assert!((acc[1][1].re / n as f64 - 1.0).abs() < 0.05);
        assert!((acc[0][1] / n as f64).norm() < 0.05);
    }

    #[test]
    fn alpha_is_never_zero_for_random_channels() {
        let mut rng = trial_rng(8, 0, StreamPurpose::Channel);
        let zeros = (0..10_000)
            .filter(|_| qstbc_decompose(&ChannelMatrix::random(2, 4, &mut rng)).unwrap().alpha.abs() < 1e-6)
            .count();
        assert_eq!(zeros, 0);
    }
}
