use super::lll::{lll_reduce, DEFAULT_DELTA};
use crate::channel::{draw_channel, SystemConfig};
use crate::error::{Error, Result};
use crate::numerics::{singular_values, ComplexMatrix, RealMatrix, SINGULAR_VALUE_REL_TOL};
use crate::stcodes::{qstbc_decompose, realify, CodeScheme, SchemeKind};
use rayon::prelude::*;

const MIN_TRIALS: usize = 1000;

fn ratio(sv: &[f64]) -> Result<f64> {
    let (max, min) = (sv[0], sv[sv.len() - 1]);
    if !(min > SINGULAR_VALUE_REL_TOL * max) {
        return Err(Error::Singular(min));
    }
    Ok(max / min)
}

/// `sigma_max / sigma_min` over the `min(rows, cols)` singular values.
pub fn condition_number(a: &RealMatrix) -> Result<f64> {
    ratio(&singular_values(a))
}

pub fn condition_number_complex(a: &ComplexMatrix) -> Result<f64> {
    ratio(&singular_values(a))
}

/// Real basis the detectors of `scheme` operate on: the realified equivalent
/// channel, or for QSTBC the realified 2x2 subsystem channel.
pub fn scheme_real_channel(scheme: SchemeKind, h: &crate::channel::ChannelMatrix) -> Result<RealMatrix> {
    if scheme == SchemeKind::Qstbc4 {
        return Ok(realify(&qstbc_decompose(h)?.h_eq));
    }
    let eq = CodeScheme::new(scheme, h.n_t())?.equivalent_channel(h)?;
    Ok(realify(&eq.complex))
}

/// Empirical density of `ln cond` on equal-width bins over `[0, max_ln_cond]`.
/// Samples above the range are counted in the last bin.
#[derive(Debug, Clone, PartialEq)]
pub struct CondHistogram {
    pub edges: Vec<f64>,
    pub density: Vec<f64>,
    pub mean_ln_cond: f64,
    pub trials: usize,
}

impl CondHistogram {
    pub fn bin_width(&self) -> f64 {
        self.edges[1] - self.edges[0]
    }

    pub fn centers(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
    }
}

/// Histogram of `ln cond` of the scheme's real detection basis over `trials`
/// channel draws, before LLL or (`with_lr`) after it. Only the first SNR-independent
/// part of `cfg` (antennas, seed) is used.
pub fn cond_histogram(
    scheme: SchemeKind,
    cfg: &SystemConfig,
    trials: usize,
    with_lr: bool,
    bins: usize,
    max_ln_cond: f64,
) -> Result<CondHistogram> {
    if trials < MIN_TRIALS {
        return Err(Error::Config(format!("condition histograms need at least {MIN_TRIALS} trials, got {trials}")));
    }
    if bins == 0 || !(max_ln_cond > 0.0) {
        return Err(Error::Config("histogram needs bins > 0 and a positive range".into()));
    }
    let samples: Vec<f64> = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<f64> {
            let basis = scheme_real_channel(scheme, &draw_channel(cfg, t as u64))?;
            let basis = if with_lr { lll_reduce(&basis, DEFAULT_DELTA)?.q } else { basis };
            Ok(condition_number(&basis)?.ln().max(0.0))
        })
        .collect::<Result<_>>()?;
    let width = max_ln_cond / bins as f64;
    let mut counts = vec![0usize; bins];
    for &s in &samples {
        counts[((s / width) as usize).min(bins - 1)] += 1;
    }
    let mean_ln_cond = samples.iter().sum::<f64>() / trials as f64;
    Ok(CondHistogram {
        edges: (0..=bins).map(|k| k as f64 * width).collect(),
        density: counts.iter().map(|&c| c as f64 / (trials as f64 * width)).collect(),
        mean_ln_cond,
        trials,
    })
}
