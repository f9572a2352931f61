use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::channel::{
    db_to_linear, draw_channel, noise_sigma_per_dim, trial_rng, Constellation, StreamPurpose, SystemConfig,
};
use crate::detect::{BlockDetector, DetectorKind};
use crate::error::{Error, Result};
use crate::numerics::Complex64;
use crate::stcodes::CodeScheme;

// Channel realizations per work unit; fixed so aggregation order never depends on threads.
const CHUNK: usize = 64;

/// One transmit configuration of a BER experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub scheme: CodeScheme,
    pub constellation: Constellation,
}

/// Error statistics of one (link, detector) pair at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BerPoint {
    pub snr_db: f64,
    pub ber: f64,
    /// Standard error across channel realizations.
    pub std_error: f64,
    pub bits: u64,
    pub channels: usize,
    /// Fraction of real coordinates an LR-aided detector placed outside the constellation.
    pub out_of_set_fraction: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    errors: u64,
    bits: u64,
    coords_out: u64,
    coords: u64,
    // per-channel error rate moments
    sum: f64,
    sum_sq: f64,
    channels: usize,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.errors += o.errors;
        self.bits += o.bits;
        self.coords_out += o.coords_out;
        self.coords += o.coords;
        self.sum += o.sum;
        self.sum_sq += o.sum_sq;
        self.channels += o.channels;
    }
}

/// BER of every detector in `detectors` on `link`, for `channels` channel
/// realizations of `blocks_per_channel` code blocks each.
///
/// Channel, bits and noise of realization `t` come from the `(seed, t)`
/// streams; the same unit-variance noise is rescaled for every SNR point.
/// Returns `[detector][snr point]`.
pub fn simulate_ber(
    link: &Link,
    detectors: &[DetectorKind],
    cfg: &SystemConfig,
    channels: usize,
    blocks_per_channel: usize,
) -> Result<Vec<Vec<BerPoint>>> {
    if channels == 0 || blocks_per_channel == 0 {
        return Err(Error::Config("BER simulation needs at least one channel and one block".into()));
    }
    let n_snr = cfg.snr_db_grid.len();
    let sigmas: Vec<f64> = cfg.snr_db_grid.iter().map(|&d| noise_sigma_per_dim(db_to_linear(d), cfg.n_t)).collect();
    let c = &link.constellation;
    let p = link.scheme.symbols_per_block();
    let bits_per_block = (p * c.bits_per_symbol()) as u64;

    let chunks: Vec<Vec<Tally>> = (0..channels.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| -> Result<Vec<Tally>> {
            let mut tallies = vec![Tally::default(); detectors.len() * n_snr];
            for t in chunk * CHUNK..((chunk + 1) * CHUNK).min(channels) {
                let h = draw_channel(cfg, t as u64);
                let eq = link.scheme.equivalent_channel(&h)?;
                let rows = eq.complex.rows();
                let dets: Vec<BlockDetector> = detectors
                    .iter()
                    .map(|&k| BlockDetector::new(&link.scheme, &h, c, k))
                    .collect::<Result<_>>()?;
                let mut bit_rng = trial_rng(cfg.seed, t as u64, StreamPurpose::Bits);
                let mut noise_rng = trial_rng(cfg.seed, t as u64, StreamPurpose::Noise);
                let mut per_channel = vec![0u64; tallies.len()];
                let mut out = vec![0u64; tallies.len()];
                for _ in 0..blocks_per_channel {
                    let labels: Vec<usize> = (0..p).map(|_| bit_rng.random_range(0..c.order())).collect();
                    let x: Vec<Complex64> = labels.iter().map(|&l| c.points()[l]).collect();
                    let clean = eq.complex.mul_vec(&x)?;
                    let w: Vec<Complex64> = (0..rows)
                        .map(|_| {
                            let re: f64 = noise_rng.sample(StandardNormal);
                            let im: f64 = noise_rng.sample(StandardNormal);
                            Complex64::new(re, im)
                        })
                        .collect();
                    for (si, &sigma) in sigmas.iter().enumerate() {
                        let y: Vec<Complex64> = clean.iter().zip(&w).map(|(s, n)| s + n * sigma).collect();
                        for (di, det) in dets.iter().enumerate() {
                            let r = det.detect(&y)?;
                            let slot = di * n_snr + si;
                            per_channel[slot] += r.bit_errors(&labels, c) as u64;
                            out[slot] += r.out_of_set as u64;
                        }
                    }
                }
                let bits = bits_per_block * blocks_per_channel as u64;
                let coords = (p * c.real_dims() * blocks_per_channel) as u64;
                for (slot, tally) in tallies.iter_mut().enumerate() {
                    let rate = per_channel[slot] as f64 / bits as f64;
                    tally.merge(&Tally {
                        errors: per_channel[slot],
                        bits,
                        coords_out: out[slot],
                        coords,
                        sum: rate,
                        sum_sq: rate * rate,
                        channels: 1,
                    });
                }
            }
            Ok(tallies)
        })
        .collect::<Result<_>>()?;

    let mut total = vec![Tally::default(); detectors.len() * n_snr];
    for chunk in &chunks {
        for (acc, t) in total.iter_mut().zip(chunk) {
            acc.merge(t);
        }
    }
    Ok((0..detectors.len())
        .map(|di| {
            (0..n_snr)
                .map(|si| {
                    let t = &total[di * n_snr + si];
                    let n = t.channels as f64;
                    let mean = t.sum / n;
                    let var = if t.channels > 1 { ((t.sum_sq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
                    BerPoint {
                        snr_db: cfg.snr_db_grid[si],
                        ber: t.errors as f64 / t.bits as f64,
                        std_error: (var / n).sqrt(),
                        bits: t.bits,
                        channels: t.channels,
                        out_of_set_fraction: t.coords_out as f64 / t.coords as f64,
                    }
                })
                .collect()
        })
        .collect())
}

/// SNR (dB) at which a BER curve crosses `target`, by linear interpolation of
/// `log10(BER)` against SNR between the bracketing grid points.
pub fn snr_at_ber(points: &[BerPoint], target: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (&w[0], &w[1]);
        if !(a.ber >= target && b.ber < target && b.ber > 0.0) {
            return None;
        }
        let (la, lb, lt) = (a.ber.log10(), b.ber.log10(), target.log10());
        Some(a.snr_db + (la - lt) / (la - lb) * (b.snr_db - a.snr_db))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ConstellationKind;
    use crate::stcodes::SchemeKind;

    fn link(kind: SchemeKind, ck: ConstellationKind) -> Link {
        Link { scheme: CodeScheme::new(kind, 4).unwrap(), constellation: Constellation::new(ck) }
    }

    #[test]
    fn high_snr_is_error_free_and_low_snr_is_not() {
        let cfg = SystemConfig::new(4, 4, vec![-10.0, 60.0], 3).unwrap();
        let l = link(SchemeKind::StackedOstbc, ConstellationKind::Qam4);
        let res = simulate_ber(&l, &[DetectorKind::Ml, DetectorKind::LrZf], &cfg, 100, 4).unwrap();
        for curve in &res {
            assert!(curve[0].ber > 0.05);
            assert_eq!(curve[1].ber, 0.0);
            assert_eq!(curve[0].bits, 100 * 4 * 8);
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let cfg = SystemConfig::new(4, 4, vec![0.0, 6.0], 9).unwrap();
        let l = link(SchemeKind::Qstbc4, ConstellationKind::Qam16);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| simulate_ber(&l, &[DetectorKind::Ml, DetectorKind::LrZf], &cfg, 300, 2).unwrap())
        };
        assert_eq!(run(1), run(5));
    }

    #[test]
    fn interpolated_crossing() {
        let pt = |snr_db, ber| BerPoint { snr_db, ber, std_error: 0.0, bits: 1, channels: 1, out_of_set_fraction: 0.0 };
        let curve = [pt(0.0, 1e-1), pt(10.0, 1e-2), pt(20.0, 1e-4)];
        assert!((snr_at_ber(&curve, 1e-3).unwrap() - 15.0).abs() < 1e-12);
        assert!(snr_at_ber(&curve, 1e-6).is_none());
    }
}
