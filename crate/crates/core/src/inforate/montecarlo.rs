use rayon::prelude::*;

use crate::channel::{draw_channel, ChannelMatrix, SystemConfig};
use crate::error::{Error, Result};

/// Number of standard errors every bound-vs-simulation comparison allows.
pub const MC_CONFIDENCE_SE: f64 = 3.0;

// Trials per work unit. Fixed so partial sums do not depend on the thread count.
const CHUNK: usize = 256;

const MIN_TRIALS: usize = 100;

/// Per-channel quantity evaluated at linear SNR `rho`.
pub type Quantity<'a> = &'a (dyn Fn(&ChannelMatrix, f64) -> Result<f64> + Sync);

/// Sample mean and standard error of a per-channel quantity at one SNR point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErgodicEstimate {
    pub snr_db: f64,
    pub mean: f64,
    pub std_error: f64,
    pub trials: usize,
}

// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.c += (self.sum - t) + v;
        } else {
            self.c += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.c
    }
}

// Per-chunk count, mean and sum of squared deviations.
#[derive(Debug, Clone, Copy)]
struct Moments {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn of(values: &[f64]) -> Self {
        let mut s = Compensated::default();
        values.iter().for_each(|&v| s.add(v));
        let n = values.len() as f64;
        let mean = s.value() / n;
        let mut d = Compensated::default();
        values.iter().for_each(|&v| d.add((v - mean) * (v - mean)));
        Self { n, mean, m2: d.value() }
    }

    fn merge(self, o: Self) -> Self {
        let n = self.n + o.n;
        let delta = o.mean - self.mean;
        Self {
            n,
            mean: self.mean + delta * o.n / n,
            m2: self.m2 + o.m2 + delta * delta * self.n * o.n / n,
        }
    }
}

/// Evaluates several quantities on a shared set of channel draws.
///
/// Trial `t` always uses the channel of `(cfg.seed, t)` at every SNR point
/// (common random numbers). Returns `[quantity][snr point]`. Results are
/// bit-identical for any number of worker threads.
pub fn ergodic_mc_many(cfg: &SystemConfig, trials: usize, quantities: &[Quantity]) -> Result<Vec<Vec<ErgodicEstimate>>> {
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("at least {MIN_TRIALS} trials are needed, got {trials}")));
    }
    let rhos = cfg.snr_linear_grid();
    let width = quantities.len() * rhos.len();
    if width == 0 {
        return Ok(vec![Vec::new(); quantities.len()]);
    }
    let chunks: Vec<Vec<Moments>> = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| -> Result<Vec<Moments>> {
            let range = c * CHUNK..((c + 1) * CHUNK).min(trials);
            let mut cols = vec![Vec::with_capacity(range.len()); width];
            for t in range {
                let h = draw_channel(cfg, t as u64);
                for (qi, q) in quantities.iter().enumerate() {
                    for (si, &rho) in rhos.iter().enumerate() {
                        cols[qi * rhos.len() + si].push(q(&h, rho)?);
                    }
                }
            }
            Ok(cols.iter().map(|v| Moments::of(v)).collect())
        })
        .collect::<Result<_>>()?;
    let mut total = chunks[0].clone();
    for chunk in &chunks[1..] {
        for (acc, m) in total.iter_mut().zip(chunk) {
            *acc = acc.merge(*m);
        }
    }
    Ok((0..quantities.len())
        .map(|qi| {
            (0..rhos.len())
                .map(|si| {
                    let m = total[qi * rhos.len() + si];
                    let var = if trials > 1 { m.m2 / (m.n - 1.0) } else { 0.0 };
                    ErgodicEstimate {
                        snr_db: cfg.snr_db_grid[si],
                        mean: m.mean,
                        std_error: (var / m.n).sqrt(),
                        trials,
                    }
                })
                .collect()
        })
        .collect())
}

/// [`ergodic_mc_many`] for a single quantity.
pub fn ergodic_mc<F>(cfg: &SystemConfig, trials: usize, quantity: F) -> Result<Vec<ErgodicEstimate>>
where
    F: Fn(&ChannelMatrix, f64) -> Result<f64> + Sync,
{
    Ok(ergodic_mc_many(cfg, trials, &[&quantity])?.remove(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::inforate::{instantaneous_capacity, rate_stacked};
    use crate::numerics::exp_integral;
    use std::f64::consts::LN_2;

    fn cfg(n_t: usize, n_r: usize, grid: Vec<f64>) -> SystemConfig {
        SystemConfig::new(n_t, n_r, grid, 2024).unwrap()
    }

    #[test]
    fn constant_evaluator() {
        let est = ergodic_mc(&cfg(2, 1, vec![0.0, 5.0]), 1000, |_, _| Ok(3.0)).unwrap();
        for e in est {
            assert_eq!(e.mean, 3.0);
            assert_eq!(e.std_error, 0.0);
            assert_eq!(e.trials, 1000);
        }
    }

    #[test]
    fn siso_capacity_matches_closed_form() {
        let est = ergodic_mc(&cfg(1, 1, vec![10.0]), 100_000, instantaneous_capacity).unwrap()[0];
        let oracle = 0.1f64.exp() * exp_integral(1, 0.1).unwrap() / LN_2;
        assert!((est.mean - oracle).abs() < MC_CONFIDENCE_SE * est.std_error, "{est:?} vs {oracle}");
    }

    #[test]
    fn standard_error_shrinks_with_trials() {
        let c = cfg(2, 2, vec![10.0]);
        let a = ergodic_mc(&c, 4000, instantaneous_capacity).unwrap()[0].std_error;
        let b = ergodic_mc(&c, 8000, instantaneous_capacity).unwrap()[0].std_error;
        let ratio = b / a;
        assert!((ratio - 0.5f64.sqrt()).abs() < 0.2 * 0.5f64.sqrt(), "{ratio}");
    }

    #[test]
    fn identical_across_thread_counts() {
        let c = cfg(4, 2, vec![0.0, 10.0, 20.0]);
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| ergodic_mc_many(&c, 3000, &[&instantaneous_capacity, &rate_stacked]).unwrap())
        };
        assert_eq!(run(1), run(4));
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn rejects_small_budgets_and_propagates_errors() {
        assert!(matches!(ergodic_mc(&cfg(2, 1, vec![0.0]), 99, |_, _| Ok(0.0)), Err(Error::Config(_))));
        assert!(ergodic_mc(&cfg(3, 1, vec![0.0]), 100, rate_stacked).is_err());
    }
}
