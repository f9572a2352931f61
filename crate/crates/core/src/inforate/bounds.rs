use std::f64::consts::LN_2;

use super::{check_rho, Dims};
use crate::channel::linear_to_db;
use crate::error::{Error, Result};
use crate::numerics::{exp_integral_scaled, harmonic, ln_factorial, EULER_GAMMA};

/// Below this SNR (dB) the lower absolute-loss member is only an approximation.
pub const ABS_LOSS_APPROX_BELOW_DB: f64 = 10.0;

// Largest n_t * n_r the log-space Jensen sum is trusted for.
const JENSEN_MAX_PRODUCT: usize = 1000;

fn require_even(d: Dims) -> Result<()> {
    if !d.n_t.is_multiple_of(2) {
        return Err(Error::Domain(format!("stacked scheme needs an even n_t, got {}", d.n_t)));
    }
    Ok(())
}

// sum_{m=1}^{n} e^a E_m(a), the average of ln(1 + lambda / a) for lambda ~ Gamma(n, 1)
fn gamma_log_mean(n: usize, a: f64) -> Result<f64> {
    (1..=n as u32).map(|m| exp_integral_scaled(m, a)).sum()
}

// exp(psi(k + 1)) = exp(H_k - gamma)
fn exp_digamma_shift(k: usize) -> f64 {
    (harmonic(k as u64) - EULER_GAMMA).exp()
}

/// Ergodic trace-determinant bound on `C`, a finite sum of upper incomplete gamma terms.
///
/// Each term `a^{m-1} e^a Gamma(1-m, a)` equals `e^a E_m(a)`, which is what is summed so the
/// evaluation stays finite for any `rho`.
pub fn cap_upper_ergodic(n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let d = Dims::new(n_t, n_r)?;
    check_rho(rho)?;
    let l = d.l() as f64;
    let a = n_t as f64 * l / rho;
    Ok(l / LN_2 * gamma_log_mean(n_t * n_r, a)?)
}

/// Jensen bound `log2 sum_i C(L,i) K!/(K-i)! (rho/n_t)^i`, summed in log space.
pub fn cap_upper_jensen(n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let d = Dims::new(n_t, n_r)?;
    check_rho(rho)?;
    if n_t * n_r > JENSEN_MAX_PRODUCT {
        return Err(Error::OverflowGuard(n_t * n_r));
    }
    let (l, k) = (d.l() as u64, d.k() as u64);
    let ln_s = (rho / n_t as f64).ln();
    let logs: Vec<f64> = (0..=l)
        .map(|i| {
            ln_factorial(l) - ln_factorial(i) - ln_factorial(l - i) + ln_factorial(k) - ln_factorial(k - i)
                + i as f64 * ln_s
        })
        .collect();
    let top = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let sum: f64 = logs.iter().map(|v| (v - top).exp()).sum();
    Ok((top + sum.ln()) / LN_2)
}

/// Lower bound `sum_{j=1}^{L} log2(1 + rho/n_t exp(psi(K-j+1)))`.
pub fn cap_lower_oyman(n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let d = Dims::new(n_t, n_r)?;
    check_rho(rho)?;
    let s = rho / n_t as f64;
    Ok((1..=d.l()).map(|j| (1.0 + s * exp_digamma_shift(d.k() - j)).log2()).sum())
}

/// Ergodic upper bound on `R_sA`, the average of the instantaneous
/// `(L1/2) log2(1 + 2 rho/(n_t L1) ||H||^2)`.
pub fn rsa_upper(n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let d = Dims::new(n_t, n_r)?;
    require_even(d)?;
    check_rho(rho)?;
    let l1 = d.l1() as f64;
    let b = n_t as f64 * l1 / (2.0 * rho);
    Ok(l1 / (2.0 * LN_2) * gamma_log_mean(n_t * n_r, b)?)
}

/// High-SNR form of [`rsa_upper`] using `log2(1 + x) ~ log2(x)`.
pub fn rsa_upper_highsnr_approx(n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let d = Dims::new(n_t, n_r)?;
    require_even(d)?;
    check_rho(rho)?;
    let l1 = d.l1() as f64;
    let n = (n_t * n_r) as u64;
    Ok(l1 / 2.0 * (2.0 * rho / (n_t as f64 * l1)).log2() + l1 / (2.0 * LN_2) * (harmonic(n - 1) - EULER_GAMMA))
}

/// Antenna regime selecting the closed-form lower bound on `R_sA`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBoundCase {
    /// `n_t <= n_r`
    FewTransmit,
    /// `n_r < n_t < 2 n_r`
    Intermediate,
    /// `2 n_r <= n_t <= 4 n_r`
    ManyTransmit,
    /// `4 n_r < n_t`; both the many-transmit and this form apply, the larger is used.
    VeryManyTransmit,
}

pub fn rsa_lower_case(n_t: usize, n_r: usize) -> LowerBoundCase {
    if n_t <= n_r {
        LowerBoundCase::FewTransmit
    } else if n_t < 2 * n_r {
        LowerBoundCase::Intermediate
    } else if n_t <= 4 * n_r {
        LowerBoundCase::ManyTransmit
    } else {
        LowerBoundCase::VeryManyTransmit
    }
}

/// Evaluates one specific lower-bound form, without checking its regime applies.
pub fn rsa_lower_case_formula(case: LowerBoundCase, n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let d = Dims::new(n_t, n_r)?;
    require_even(d)?;
    check_rho(rho)?;
    let nt = n_t as f64;
    let v = match case {
        LowerBoundCase::FewTransmit => {
            if n_t > n_r {
                return Err(Error::Domain(format!("form needs n_t <= n_r, got {n_t} > {n_r}")));
            }
            let mean: f64 = (1..=n_t).map(|j| harmonic((n_r - j) as u64)).sum::<f64>() / nt;
            nt / 2.0 * (1.0 + 2.0 * rho / nt * (mean - EULER_GAMMA).exp()).log2()
        }
        LowerBoundCase::Intermediate => {
            let s = 2.0 * rho / nt;
            0.5 * (1..=d.l()).map(|j| (1.0 + s * exp_digamma_shift(d.k() - j)).log2()).sum::<f64>()
        }
        LowerBoundCase::ManyTransmit => {
            if n_t < 2 * n_r {
                return Err(Error::Domain(format!("form needs n_t >= 2 n_r, got n_t={n_t}, n_r={n_r}")));
            }
            let s = rho / nt;
            0.5 * (1..=d.l1()).map(|j| (1.0 + s * exp_digamma_shift(d.k1() - j)).log2()).sum::<f64>()
        }
        LowerBoundCase::VeryManyTransmit => {
            if n_t <= 4 * n_r {
                return Err(Error::Domain(format!("form needs n_t > 4 n_r, got n_t={n_t}, n_r={n_r}")));
            }
            let m = 2 * n_r;
            let mean: f64 = (1..=m).map(|j| harmonic((n_t / 2 - j) as u64)).sum::<f64>() / m as f64;
            n_r as f64 * (1.0 + 2.0 * rho / nt * (mean - EULER_GAMMA).exp()).log2()
        }
    };
    Ok(v)
}

/// Closed-form lower bound on `R_sA` for the regime of `(n_t, n_r)`.
pub fn rsa_lower(n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
    let case = rsa_lower_case(n_t, n_r);
    let v = rsa_lower_case_formula(case, n_t, n_r, rho)?;
    if case == LowerBoundCase::VeryManyTransmit {
        return Ok(v.max(rsa_lower_case_formula(LowerBoundCase::ManyTransmit, n_t, n_r, rho)?));
    }
    Ok(v)
}

/// Two-sided characterization of the absolute loss `C - R_sA`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbsLossBounds {
    pub lower: f64,
    pub upper: f64,
    /// The lower member comes from high-SNR approximations and is not a strict bound here.
    pub lower_is_approximate: bool,
}

pub fn abs_loss_bounds(n_t: usize, n_r: usize, rho: f64) -> Result<AbsLossBounds> {
    let d = Dims::new(n_t, n_r)?;
    check_rho(rho)?;
    let (l, l1) = (d.l() as f64, d.l1() as f64);
    let lower = (l - l1 / 2.0) * (1.0 + rho / n_t as f64).log2();
    Ok(AbsLossBounds {
        lower,
        upper: l1 / (2.0 * LN_2) + lower,
        lower_is_approximate: linear_to_db(rho) < ABS_LOSS_APPROX_BELOW_DB,
    })
}

/// Bounds on `C / R_sA`, clamped to the trivial interval `[1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioBounds {
    pub lower: f64,
    pub upper: f64,
    pub lower_unclamped: f64,
    pub upper_unclamped: f64,
}

pub fn ratio_bounds(n_t: usize, n_r: usize, rho: f64) -> Result<RatioBounds> {
    let lower_unclamped = cap_lower_oyman(n_t, n_r, rho)? / rsa_upper(n_t, n_r, rho)?;
    let upper_unclamped = cap_upper_jensen(n_t, n_r, rho)? / rsa_lower(n_t, n_r, rho)?;
    Ok(RatioBounds {
        lower: lower_unclamped.max(1.0),
        upper: upper_unclamped.min(2.0),
        lower_unclamped,
        upper_unclamped,
    })
}

/// What a bound curve bounds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRole {
    UpperC,
    LowerC,
    UpperRsa,
    LowerRsa,
    Approx,
}

/// Named analytic curve over `(n_t, n_r, rho)`.
#[derive(Clone, Copy)]
pub struct BoundCurve {
    pub name: &'static str,
    pub role: BoundRole,
    pub evaluator: fn(usize, usize, f64) -> Result<f64>,
}

impl std::fmt::Debug for BoundCurve {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("BoundCurve").field("name", &self.name).field("role", &self.role).finish()
    }
}

impl BoundCurve {
    pub fn eval(&self, n_t: usize, n_r: usize, rho: f64) -> Result<f64> {
        (self.evaluator)(n_t, n_r, rho)
    }
}

/// Every analytic curve, in the column order used by the rate tables.
pub fn all_bound_curves() -> Vec<BoundCurve> {
    vec![
        BoundCurve { name: "c_ub", role: BoundRole::UpperC, evaluator: cap_upper_ergodic },
        BoundCurve { name: "c_jensen", role: BoundRole::UpperC, evaluator: cap_upper_jensen },
        BoundCurve { name: "c_lb", role: BoundRole::LowerC, evaluator: cap_lower_oyman },
        BoundCurve { name: "rsa_ub", role: BoundRole::UpperRsa, evaluator: rsa_upper },
        BoundCurve { name: "rsa_lb", role: BoundRole::LowerRsa, evaluator: rsa_lower },
        BoundCurve { name: "rsa_ub_approx", role: BoundRole::Approx, evaluator: rsa_upper_highsnr_approx },
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::db_to_linear;
    use crate::numerics::gamma_upper;
    use approx::assert_relative_eq;

    #[test]
    fn siso_upper_bound_is_e1_form() {
        for rho in [0.5, 1.0, 10.0, 100.0] {
            let oracle = (1.0_f64 / rho).exp() * crate::numerics::exp_integral(1, 1.0 / rho).unwrap() / LN_2;
            assert_relative_eq!(cap_upper_ergodic(1, 1, rho).unwrap(), oracle, max_relative = 1e-10);
        }
    }

    #[test]
    fn ergodic_upper_matches_literal_gamma_sum() {
        // the literal sum of a^{N-k-1} e^a Gamma(1-(N-k), a) where it does not overflow
        for (n_t, n_r) in [(2, 1), (2, 2), (4, 2), (3, 3)] {
            for rho in [1.0, 10.0, 100.0] {
                let l = n_t.min(n_r) as f64;
                let n = (n_t * n_r) as i32;
                let a = n_t as f64 * l / rho;
                let lit: f64 = (0..n)
                    .map(|k| a.powi(n - k - 1) * a.exp() * gamma_upper(1 - (n - k), a).unwrap())
                    .sum::<f64>()
                    * l
                    / LN_2;
                assert_relative_eq!(cap_upper_ergodic(n_t, n_r, rho).unwrap(), lit, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn jensen_examples() {
        assert_relative_eq!(cap_upper_jensen(1, 1, 1.0).unwrap(), 1.0, max_relative = 1e-14);
        assert!(cap_upper_jensen(4, 2, 1e-12).unwrap() < 1e-9);
        // direct evaluation for a small case
        let direct = (1.0 + 2.0 * 4.0 * 2.5 + 4.0 * 3.0 * 2.5f64.powi(2)).log2();
        assert_relative_eq!(cap_upper_jensen(4, 2, 10.0).unwrap(), direct, max_relative = 1e-12);
        assert!(matches!(cap_upper_jensen(40, 40, 1.0), Err(Error::OverflowGuard(1600))));
        assert!(cap_upper_jensen(32, 31, 1e4).unwrap().is_finite());
    }

    #[test]
    fn oyman_examples() {
        // log2(1 + e^{-gamma})
        assert_relative_eq!(cap_lower_oyman(1, 1, 1.0).unwrap(), (1.0 + (-EULER_GAMMA).exp()).log2(), max_relative = 1e-14);
        assert_relative_eq!(cap_lower_oyman(1, 1, 1.0).unwrap(), 0.642_895_1, epsilon = 1e-6);
        assert!(cap_lower_oyman(2, 2, 1e-12).unwrap() < 1e-11);
    }

    #[test]
    fn table_case_selection() {
        use LowerBoundCase::*;
        assert_eq!(rsa_lower_case(2, 2), FewTransmit);
        assert_eq!(rsa_lower_case(6, 4), Intermediate);
        assert_eq!(rsa_lower_case(4, 2), ManyTransmit);
        assert_eq!(rsa_lower_case(8, 2), ManyTransmit);
        assert_eq!(rsa_lower_case(10, 2), VeryManyTransmit);
    }

    #[test]
    fn boundary_case_uses_many_transmit_form() {
        let rho = 10.0;
        let expected: f64 = 0.5
            * (1..=4)
                .map(|j| (1.0 + rho / 4.0 * (harmonic(4 - j) - EULER_GAMMA).exp()).log2())
                .sum::<f64>();
        assert_relative_eq!(rsa_lower(4, 2, rho).unwrap(), expected, max_relative = 1e-14);
        assert!(rsa_lower(3, 1, 1.0).is_err());
    }

    #[test]
    fn very_many_transmit_takes_the_max() {
        for rho in [0.1, 1.0, 100.0] {
            let both = [
                rsa_lower_case_formula(LowerBoundCase::ManyTransmit, 12, 2, rho).unwrap(),
                rsa_lower_case_formula(LowerBoundCase::VeryManyTransmit, 12, 2, rho).unwrap(),
            ];
            assert_eq!(rsa_lower(12, 2, rho).unwrap(), both[0].max(both[1]));
        }
    }

    #[test]
    fn bounds_vanish_at_low_snr() {
        for curve in all_bound_curves().iter().filter(|c| c.role != BoundRole::Approx) {
            assert!(curve.eval(4, 2, 1e-9).unwrap() < 1e-6, "{}", curve.name);
        }
        let a = abs_loss_bounds(4, 2, 1e-12).unwrap();
        assert!(a.lower.abs() < 1e-9 && (a.upper - 2.0 / LN_2).abs() < 1e-9 && a.lower_is_approximate);
    }

    #[test]
    fn abs_loss_constant_when_many_transmit() {
        for rho in [1.0, 10.0, 1000.0] {
            let a = abs_loss_bounds(4, 2, rho).unwrap();
            assert_eq!(a.lower, 0.0);
            assert_relative_eq!(a.upper, 2.0 / LN_2, max_relative = 1e-14);
        }
        assert!(!abs_loss_bounds(4, 4, 100.0).unwrap().lower_is_approximate);
    }

    #[test]
    fn ratio_bounds_are_clamped() {
        for (n_t, n_r) in [(2, 1), (4, 2), (8, 9), (4, 4)] {
            for db in [0.0, 10.0, 30.0] {
                let r = ratio_bounds(n_t, n_r, db_to_linear(db)).unwrap();
                assert!(r.lower >= 1.0 && r.upper <= 2.0);
            }
        }
    }

    #[test]
    fn curves_are_monotone_and_finite() {
        let grid: Vec<f64> = (-10..=40).map(|d| db_to_linear(d as f64)).collect();
        for curve in all_bound_curves().iter().filter(|c| c.role != BoundRole::Approx) {
            for (n_t, n_r) in [(2, 1), (4, 1), (4, 2), (4, 4), (6, 4), (8, 9), (12, 2)] {
                let vals: Vec<f64> = grid.iter().map(|&r| curve.eval(n_t, n_r, r).unwrap()).collect();
                assert!(vals.iter().all(|v| v.is_finite()));
                assert!(vals.windows(2).all(|w| w[1] >= w[0]), "{} at ({n_t},{n_r})", curve.name);
            }
        }
    }

    #[test]
    fn approximation_converges_at_high_snr() {
        for n_t in [2, 4, 6, 8] {
            for n_r in 1..=4 {
                for db in [30.0, 40.0] {
                    let rho = db_to_linear(db);
                    let gap = rsa_upper(n_t, n_r, rho).unwrap() - rsa_upper_highsnr_approx(n_t, n_r, rho).unwrap();
                    assert!(gap.abs() < 0.15, "({n_t},{n_r}) at {db} dB: {gap}");
                }
            }
        }
    }

    #[test]
    fn stacked_upper_collapses_to_capacity_upper_for_one_receive_antenna() {
        for n_t in [2, 4, 8] {
            for rho in [0.3, 3.0, 300.0] {
                assert_relative_eq!(
                    rsa_upper(n_t, 1, rho).unwrap(),
                    cap_upper_ergodic(n_t, 1, rho).unwrap(),
                    max_relative = 1e-12
                );
            }
        }
    }
}
