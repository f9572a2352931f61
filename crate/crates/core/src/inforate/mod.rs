//! Instantaneous and ergodic capacity of the MIMO channel, the rate of the
//! stacked scheme, and closed-form bounds on both.
//!
//! Shorthands: `L = min(n_t, n_r)`, `K = max(n_t, n_r)`,
//! `L1 = min(n_t, 2 n_r)`, `K1 = max(2 n_r, n_t)`. All rates are in bits per
//! channel use and `rho` is the linear SNR.

mod bounds;
mod montecarlo;

use std::f64::consts::LN_2;

pub use bounds::{
    abs_loss_bounds, all_bound_curves, cap_lower_oyman, cap_upper_ergodic, cap_upper_jensen, ratio_bounds,
    rsa_lower, rsa_lower_case, rsa_lower_case_formula, rsa_upper, rsa_upper_highsnr_approx, AbsLossBounds, BoundCurve,
    BoundRole, LowerBoundCase, RatioBounds, ABS_LOSS_APPROX_BELOW_DB,
};
pub use montecarlo::{ergodic_mc, ergodic_mc_many, ErgodicEstimate, Quantity, MC_CONFIDENCE_SE};

use crate::channel::ChannelMatrix;
use crate::error::{Error, Result};
use crate::numerics::{hermitian_gram, logdet_hermitian_psd, ComplexMatrix};
use crate::stcodes::equivalent_channel_stacked;

/// Antenna-count shorthands used by the bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dims {
    pub n_t: usize,
    pub n_r: usize,
}

impl Dims {
    pub fn new(n_t: usize, n_r: usize) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::Domain(format!("antenna counts must be positive (n_t={n_t}, n_r={n_r})")));
        }
        Ok(Self { n_t, n_r })
    }

    pub fn l(&self) -> usize {
        self.n_t.min(self.n_r)
    }

    pub fn k(&self) -> usize {
        self.n_t.max(self.n_r)
    }

    pub fn l1(&self) -> usize {
        self.n_t.min(2 * self.n_r)
    }

    pub fn k1(&self) -> usize {
        self.n_t.max(2 * self.n_r)
    }
}

pub(crate) fn check_rho(rho: f64) -> Result<()> {
    if !(rho > 0.0) || !rho.is_finite() {
        return Err(Error::Domain(format!("SNR must be positive and finite, got {rho}")));
    }
    Ok(())
}

/// `log2 det(I + (rho / n_t) A^H A)` for a channel-like matrix `a` and transmit count `n_t`.
pub fn log2_det_identity_plus(a: &ComplexMatrix, n_t: usize, rho: f64) -> Result<f64> {
    let g = hermitian_gram(a).identity_plus_scaled(rho / n_t as f64)?;
    Ok(logdet_hermitian_psd(&g)? / LN_2)
}

/// `I = log2 det(I + (rho / n_t) H^H H)`.
pub fn instantaneous_capacity(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    log2_det_identity_plus(h.matrix(), h.n_t(), rho)
}

/// `I_sA = 1/2 log2 det(I + (rho / n_t) H'^H H')` with `H'` the stacked equivalent channel.
pub fn rate_stacked(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let eq = equivalent_channel_stacked(h)?;
    Ok(0.5 * log2_det_identity_plus(&eq.complex, h.n_t(), rho)?)
}

/// Trace-determinant bound `L log2(1 + rho / (n_t L) ||H||^2)` on the instantaneous capacity.
pub fn cap_upper_instant(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let d = Dims::new(h.n_t(), h.n_r())?;
    let l = d.l() as f64;
    Ok(l * (1.0 + rho / (d.n_t as f64 * l) * h.frobenius_sq()).log2())
}

/// `(L1 / 2) log2(1 + 2 rho / (n_t L1) ||H||^2)`, an upper bound on `I_sA`.
pub fn rsa_upper_instant(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let d = Dims::new(h.n_t(), h.n_r())?;
    let l1 = d.l1() as f64;
    Ok(l1 / 2.0 * (1.0 + 2.0 * rho / (d.n_t as f64 * l1) * h.frobenius_sq()).log2())
}

/// Fischer-inequality bound for two receive antennas:
/// `log2((1 + rho/n_t lambda_1)(1 + rho/n_t lambda_2))` with `lambda_i` the row energies.
pub fn fischer_bound_two_rx(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if h.n_r() != 2 {
        return Err(Error::Shape(format!("Fischer bound needs n_r = 2, got {}", h.n_r())));
    }
    let s = rho / h.n_t() as f64;
    let row = |i: usize| (0..h.n_t()).map(|j| h.gain(i, j).norm_sqr()).sum::<f64>();
    Ok(((1.0 + s * row(0)) * (1.0 + s * row(1))).log2())
}

/// `2 log2(1 + rho / (2 n_t) ||H||^2)`, the arithmetic-geometric relaxation of [`fischer_bound_two_rx`].
pub fn amgm_bound_two_rx(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if h.n_r() != 2 {
        return Err(Error::Shape(format!("bound needs n_r = 2, got {}", h.n_r())));
    }
    Ok(2.0 * (1.0 + rho / (2.0 * h.n_t() as f64) * h.frobenius_sq()).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{trial_rng, StreamPurpose};
    use crate::numerics::Complex64;
    use nalgebra::DMatrix;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_channel(n_r: usize, n_t: usize, seed: u64) -> ChannelMatrix {
        ChannelMatrix::random(n_r, n_t, &mut trial_rng(seed, 0, StreamPurpose::Channel))
    }

    #[test]
    fn identity_channel_capacity() {
        let h = ChannelMatrix::from_matrix(ComplexMatrix::identity(2));
        assert!((instantaneous_capacity(&h, 2.0).unwrap() - 2.0).abs() < 1e-14);
        // equality case of the trace-determinant bound
        assert!((cap_upper_instant(&h, 2.0).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn single_receive_capacity_closed_form() {
        let h = random_channel(1, 4, 1);
        let rho = 7.0;
        let expected = (1.0 + rho / 4.0 * h.frobenius_sq()).log2();
        assert!((instantaneous_capacity(&h, rho).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn capacity_matches_eigenvalue_oracle() {
        let h = random_channel(3, 3, 2);
        let rho = 5.0;
        let gram = hermitian_gram(h.matrix());
        let eig = DMatrix::from_row_slice(3, 3, gram.as_slice()).symmetric_eigenvalues();
        let oracle: f64 = eig.iter().map(|l| (1.0 + rho * l / 3.0).log2()).sum();
        assert!((instantaneous_capacity(&h, rho).unwrap() - oracle).abs() < 1e-10);
    }

    #[test]
    fn stacked_rate_small_example() {
        let h = ChannelMatrix::from_matrix(ComplexMatrix::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)]]).unwrap());
        assert!((rate_stacked(&h, 2.0).unwrap() - 3f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn stacked_rate_achieves_capacity_with_one_receive_antenna() {
        for n_t in [2, 4, 6, 8] {
            let h = random_channel(1, n_t, n_t as u64);
            for rho in [0.1, 1.0, 10.0, 1000.0] {
                let d = rate_stacked(&h, rho).unwrap() - instantaneous_capacity(&h, rho).unwrap();
                assert!(d.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn per_sample_sandwich() {
        let h = random_channel(2, 4, 5);
        let (cap, rate) = (instantaneous_capacity(&h, 10.0).unwrap(), rate_stacked(&h, 10.0).unwrap());
        assert!(0.5 * cap <= rate && rate < cap);
    }

    #[test]
    fn dsttd_bounds_chain() {
        let h = random_channel(2, 4, 6);
        let rho = 20.0;
        let rate = rate_stacked(&h, rho).unwrap();
        let fischer = fischer_bound_two_rx(&h, rho).unwrap();
        let amgm = amgm_bound_two_rx(&h, rho).unwrap();
        assert!(rate < fischer && fischer <= amgm + 1e-12);
    }

    #[test]
    fn rejects_bad_snr() {
        let h = random_channel(1, 2, 0);
        assert!(instantaneous_capacity(&h, 0.0).is_err());
        assert!(rate_stacked(&h, -1.0).is_err());
        assert!(rate_stacked(&random_channel(1, 3, 0), 1.0).is_err());
    }
}
