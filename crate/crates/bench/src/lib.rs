//! Fixtures shared by the kernel benchmarks.

use stcsim_core::channel::{complex_gaussian, trial_rng, ChannelMatrix, StreamPurpose};
use stcsim_core::numerics::Complex64;

/// `count` Rayleigh channels from a fixed stream, so every run times the same inputs.
pub fn channels(n_r: usize, n_t: usize, count: usize) -> Vec<ChannelMatrix> {
    let mut rng = trial_rng(2024, 0, StreamPurpose::Channel);
    (0..count).map(|_| ChannelMatrix::random(n_r, n_t, &mut rng)).collect()
}

/// Unit-variance complex Gaussian receive vectors of length `len`.
pub fn receive_vectors(len: usize, count: usize) -> Vec<Vec<Complex64>> {
    let mut rng = trial_rng(2024, 1, StreamPurpose::Noise);
    (0..count).map(|_| (0..len).map(|_| complex_gaussian(&mut rng)).collect()).collect()
}
