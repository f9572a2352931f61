//! Rayleigh channel and noise generation, SNR bookkeeping and constellations.
//!
//! Transmit symbols always have unit average power; the per-antenna power
//! normalisation `1/n_t` is folded into the noise, which has variance
//! `n_t / rho` per complex entry. The received SNR is `rho` either way.

mod constellation;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub use constellation::{Constellation, ConstellationKind};

use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix};

/// Antenna counts, SNR grid and seed of one simulated configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    pub n_t: usize,
    pub n_r: usize,
    pub snr_db_grid: Vec<f64>,
    pub seed: u64,
}

impl SystemConfig {
    pub fn new(n_t: usize, n_r: usize, snr_db_grid: Vec<f64>, seed: u64) -> Result<Self> {
        if n_t == 0 || n_r == 0 {
            return Err(Error::Config(format!("antenna counts must be positive (n_t={n_t}, n_r={n_r})")));
        }
        if snr_db_grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Config("snr grid must be strictly increasing".into()));
        }
        if snr_db_grid.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("snr grid contains a non-finite value".into()));
        }
        Ok(Self { n_t, n_r, snr_db_grid, seed })
    }

    /// Stacked schemes pair antennas into Alamouti blocks.
    pub fn require_even_nt(&self) -> Result<()> {
        if !self.n_t.is_multiple_of(2) {
            return Err(Error::Config(format!("stacked OSTBC needs an even n_t, got {}", self.n_t)));
        }
        Ok(())
    }

    pub fn snr_linear_grid(&self) -> Vec<f64> {
        self.snr_db_grid.iter().map(|&d| db_to_linear(d)).collect()
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(lin: f64) -> f64 {
    10.0 * lin.log10()
}

/// Purpose tag separating the random streams of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StreamPurpose {
    Channel = 1,
    Noise = 2,
    Bits = 3,
    Auxiliary = 4,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream for `(seed, trial, purpose)`.
///
/// The ChaCha key is derived from `(seed, purpose)` and the trial index is the
/// stream id, so every trial can be regenerated on its own and distinct
/// purposes never share state.
pub fn trial_rng(seed: u64, trial: u64, purpose: StreamPurpose) -> ChaCha8Rng {
    let key = splitmix64(seed ^ splitmix64(purpose as u64));
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(trial);
    rng
}

/// One `CN(0, 1)` sample: independent `N(0, 1/2)` real and imaginary parts.
pub fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `n_r x n_t` Rayleigh channel realization.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix(ComplexMatrix);

impl ChannelMatrix {
    pub fn from_matrix(m: ComplexMatrix) -> Self {
        Self(m)
    }

    pub fn n_r(&self) -> usize {
        self.0.rows()
    }

    pub fn n_t(&self) -> usize {
        self.0.cols()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    /// `h_ij`, receive antenna `i`, transmit antenna `j` (both zero based).
    pub fn gain(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    /// `lambda = sum |h_ij|^2`.
    pub fn frobenius_sq(&self) -> f64 {
        self.0.frobenius_sq()
    }

    /// Draws i.i.d. `CN(0,1)` gains from `rng`.
    pub fn random<R: Rng + ?Sized>(n_r: usize, n_t: usize, rng: &mut R) -> Self {
        Self(ComplexMatrix::from_fn(n_r, n_t, |_, _| complex_gaussian(rng)))
    }
}

/// Channel for trial `trial_index`; depends only on `(cfg.seed, trial_index)` and the antenna counts.
pub fn draw_channel(cfg: &SystemConfig, trial_index: u64) -> ChannelMatrix {
    let mut rng = trial_rng(cfg.seed, trial_index, StreamPurpose::Channel);
    ChannelMatrix::random(cfg.n_r, cfg.n_t, &mut rng)
}

/// Noise standard deviation per real dimension for received SNR `rho`.
pub fn noise_sigma_per_dim(snr_linear: f64, n_t: usize) -> f64 {
    (n_t as f64 / (2.0 * snr_linear)).sqrt()
}

/// Complex AWGN with variance `n_t / rho` per entry.
pub fn draw_noise<R: Rng + ?Sized>(rows: usize, cols: usize, snr_db: f64, n_t: usize, rng: &mut R) -> ComplexMatrix {
    let sigma = noise_sigma_per_dim(db_to_linear(snr_db), n_t);
    ComplexMatrix::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(re * sigma, im * sigma)
    })
}
