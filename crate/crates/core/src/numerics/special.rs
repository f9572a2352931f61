//! Exponential integrals, the upper incomplete gamma function at non-positive
//! integer order, and the digamma function at positive integers.

use crate::error::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Relative accuracy the special functions are held to.
pub const SPECIAL_REL_TOL: f64 = 1e-8;

// Largest error amplification accepted from the upward recurrence before the
// direct continued fraction is used instead.
const MAX_RECURRENCE_GAIN: f64 = 1e3;

/// `sum_{p=1}^{n} 1/p`, zero for `n == 0`.
pub fn harmonic(n: u64) -> f64 {
    (1..=n).map(|p| 1.0 / p as f64).sum()
}

/// `psi(x) = -gamma + sum_{p=1}^{x-1} 1/p` for positive integers.
pub fn digamma_integer(x: i64) -> Result<f64> {
    if x < 1 {
        return Err(Error::Domain(format!("digamma_integer needs x >= 1, got {x}")));
    }
    Ok(harmonic((x - 1) as u64) - EULER_GAMMA)
}

/// `e^x E_1(x)` for `x > 0`.
fn scaled_e1(x: f64) -> f64 {
    if x <= 1.0 {
        // E_1(x) = -gamma - ln x - sum_{k>=1} (-x)^k / (k k!)
        let mut sum = 0.0;
        let mut term = 1.0;
        for k in 1..200 {
            term *= -x / k as f64;
            let add = term / k as f64;
            sum += add;
            if add.abs() < 1e-17 * sum.abs().max(1e-300) {
                break;
            }
        }
        let e1 = -EULER_GAMMA - x.ln() - sum;
        e1 * x.exp()
    } else {
        continued_fraction(1, x)
    }
}

// Modified Lentz evaluation of e^x E_n(x), valid for x > 1 and n >= 1.
fn continued_fraction(n: u32, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let nm1 = n as f64 - 1.0;
    let mut b = x + n as f64;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let a = -(i as f64) * (nm1 + i as f64);
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `e^x E_m(x)` for integer `m >= 0` and `x > 0`.
///
/// Seeds from `E_1` and walks the upward recurrence
/// `E_{m+1}(x) = (e^{-x} - x E_m(x)) / m`; when the accumulated error gain
/// `x^{m-1}/(m-1)!` would exceed `MAX_RECURRENCE_GAIN` the continued fraction
/// for `E_m` is evaluated directly.
pub fn exp_integral_scaled(m: u32, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("exponential integral needs x > 0, got {x}")));
    }
    if m == 0 {
        return Ok(1.0 / x);
    }
    let log_gain = (m as f64 - 1.0) * x.ln() - ln_factorial(m as u64 - 1);
    if x > 1.0 && log_gain > MAX_RECURRENCE_GAIN.ln() {
        return Ok(continued_fraction(m, x));
    }
    let mut s = scaled_e1(x);
    for k in 1..m {
        s = (1.0 - x * s) / k as f64;
    }
    Ok(s)
}

/// `E_m(x)` for integer `m >= 0` and `x > 0`.
pub fn exp_integral(m: u32, x: f64) -> Result<f64> {
    Ok(exp_integral_scaled(m, x)? * (-x).exp())
}

/// `e^x Gamma(a, x)` for integer `a <= 1`.
pub fn gamma_upper_scaled(a: i32, x: f64) -> Result<f64> {
    if a > 1 {
        return Err(Error::Domain(format!("gamma_upper needs integer a <= 1, got {a}")));
    }
    if !(x > 0.0) {
        return Err(Error::Domain(format!("gamma_upper needs x > 0, got {x}")));
    }
    // Gamma(1 - m, x) = x^{1-m} E_m(x)
    let m = (1 - a) as u32;
    Ok(x.powi(a) * exp_integral_scaled(m, x)?)
}

/// Upper incomplete gamma `Gamma(a, x) = int_x^inf t^{a-1} e^{-t} dt` for integer `a <= 1`.
pub fn gamma_upper(a: i32, x: f64) -> Result<f64> {
    Ok(gamma_upper_scaled(a, x)? * (-x).exp())
}

/// `ln n!`.
pub fn ln_factorial(n: u64) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}
