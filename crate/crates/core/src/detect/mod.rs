//! Detectors for the equivalent channel models and condition-number diagnostics.
//!
//! Every detector sees the stacked receive vector `y = H_eq x + n` of one code
//! block. Linear detectors work on the real-valued model produced by
//! [`real_system`]; ML works on the complex model directly.

mod cond;
mod linear;
mod lll;
mod ml;
mod receiver;

use std::fmt;
use std::str::FromStr;

pub use cond::{cond_histogram, condition_number, condition_number_complex, scheme_real_channel, CondHistogram};
pub use linear::{lr_zf_detect, zf_detect, Clipping, LrZfDetector, ZfDetector};
pub use lll::{gram_schmidt_coefficients, lll_reduce, IntMatrix, LatticeReduction, DEFAULT_DELTA};
pub use ml::{ml_detect, ml_detect_stacked, ML_MAX_CANDIDATES};
pub use receiver::BlockDetector;

use crate::channel::Constellation;
use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, RealMatrix};
use crate::stcodes::realify;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Ml,
    Zf,
    LrZf,
    /// LR-aided ZF whose out-of-set decisions are erased instead of clipped.
    LrZfNoClip,
}

impl fmt::Display for DetectorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ml => "ml",
            Self::Zf => "zf",
            Self::LrZf => "lr_zf",
            Self::LrZfNoClip => "lr_zf_noclip",
        })
    }
}

impl FromStr for DetectorKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "ml" => Ok(Self::Ml),
            "zf" => Ok(Self::Zf),
            "lr_zf" | "lrzf" => Ok(Self::LrZf),
            "lr_zf_noclip" | "lrzf_noclip" => Ok(Self::LrZfNoClip),
            other => Err(Error::Config(format!("unknown detector '{other}'"))),
        }
    }
}

/// Condition numbers of the detection basis before and after reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondDiagnostic {
    pub before: f64,
    pub after: f64,
}

/// Hard decisions for one block.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub symbols: Vec<Complex64>,
    /// Constellation label per symbol; `None` marks an erased decision.
    pub labels: Vec<Option<usize>>,
    /// Real coordinates that fell outside the constellation and were moved back in (or erased).
    pub out_of_set: usize,
    pub diagnostic: Option<CondDiagnostic>,
}

impl DetectionResult {
    fn from_labels(labels: Vec<usize>, c: &Constellation) -> Self {
        Self {
            symbols: labels.iter().map(|&l| c.points()[l]).collect(),
            labels: labels.into_iter().map(Some).collect(),
            out_of_set: 0,
            diagnostic: None,
        }
    }

    /// Decided bits; erased symbols demap to the all-zero label.
    pub fn bits(&self, c: &Constellation) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.labels.len() * c.bits_per_symbol());
        for l in &self.labels {
            c.push_label_bits(l.unwrap_or(0), &mut out);
        }
        out
    }

    /// Bit errors against the transmitted labels; every bit of an erased symbol counts as an error.
    pub fn bit_errors(&self, sent: &[usize], c: &Constellation) -> usize {
        let b = c.bits_per_symbol();
        self.labels
            .iter()
            .zip(sent)
            .map(|(got, &tx)| match got {
                Some(l) => (l ^ tx).count_ones() as usize,
                None => b,
            })
            .sum()
    }
}

/// Real model of `h` for constellation `c`: `[[Re, -Im], [Im, Re]]` acting on
/// `(Re x; Im x)`, keeping only the `Re x` columns for a real constellation.
pub fn real_system(h: &ComplexMatrix, c: &Constellation) -> RealMatrix {
    let full = realify(h);
    if c.is_real() {
        full.select_cols(&(0..h.cols()).collect::<Vec<_>>())
    } else {
        full
    }
}

// Symbols from the real coordinates of `real_system`.
fn coords_to_symbols(x: &[f64], p: usize, c: &Constellation) -> Vec<Complex64> {
    (0..p)
        .map(|k| if c.is_real() { Complex64::new(x[k], 0.0) } else { Complex64::new(x[k], x[p + k]) })
        .collect()
}
