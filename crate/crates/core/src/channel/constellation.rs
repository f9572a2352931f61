use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstellationKind {
    Bpsk,
    Qam4,
    Qam16,
}

impl ConstellationKind {
    pub fn order(self) -> usize {
        match self {
            Self::Bpsk => 2,
            Self::Qam4 => 4,
            Self::Qam16 => 16,
        }
    }
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Bpsk => "bpsk",
            Self::Qam4 => "qam4",
            Self::Qam16 => "qam16",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "bpsk" => Ok(Self::Bpsk),
            "qam4" | "4qam" | "qpsk" => Ok(Self::Qam4),
            "qam16" | "16qam" => Ok(Self::Qam16),
            other => Err(Error::Config(format!("unknown constellation '{other}'"))),
        }
    }
}

fn gray(k: usize) -> usize {
    k ^ (k >> 1)
}

/// Unit-average-power symbol set with a Gray bit labeling.
///
/// `points()[label]` is the symbol carrying the bit pattern `label`
/// (most significant bit first). QAM labels put the in-phase bits above the
/// quadrature bits, each axis Gray coded over its PAM levels.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    points: Vec<Complex64>,
    bits_per_symbol: usize,
    // per-axis amplitudes, indexed by axis label
    axis_levels: Vec<f64>,
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        match kind {
            ConstellationKind::Bpsk => Self {
                kind,
                points: vec![Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)],
                bits_per_symbol: 1,
                axis_levels: vec![1.0, -1.0],
            },
            ConstellationKind::Qam4 | ConstellationKind::Qam16 => {
                let m = kind.order();
                let per_axis = (m as f64).sqrt().round() as usize;
                let axis_bits = per_axis.trailing_zeros() as usize;
                let c = Self::qam_scale(m);
                // position k = 0 is the most positive level
                let mut axis_levels = vec![0.0; per_axis];
                for k in 0..per_axis {
                    axis_levels[gray(k)] = (per_axis as f64 - 1.0 - 2.0 * k as f64) * c / 2.0;
                }
                let points = (0..m)
                    .map(|label| {
                        let i_lab = label >> axis_bits;
                        let q_lab = label & (per_axis - 1);
                        Complex64::new(axis_levels[i_lab], axis_levels[q_lab])
                    })
                    .collect();
                Self { kind, points, bits_per_symbol: 2 * axis_bits, axis_levels }
            }
        }
    }

    /// `C = sqrt(6 / (M - 1))`, the spacing of a unit-power square QAM.
    pub fn qam_scale(order: usize) -> f64 {
        (6.0 / (order as f64 - 1.0)).sqrt()
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    /// BPSK occupies a single real dimension.
    pub fn is_real(&self) -> bool {
        self.kind == ConstellationKind::Bpsk
    }

    /// Real dimensions per symbol in the real-valued model.
    pub fn real_dims(&self) -> usize {
        if self.is_real() {
            1
        } else {
            2
        }
    }

    /// Per-dimension amplitudes, indexed by axis label.
    pub fn axis_levels(&self) -> &[f64] {
        &self.axis_levels
    }

    /// Spacing used to map the per-dimension levels onto shifted integers:
    /// every level equals `scale * (a + 1/2)` for an integer `a`.
    pub fn lattice_scale(&self) -> f64 {
        match self.kind {
            ConstellationKind::Bpsk => 2.0,
            _ => Self::qam_scale(self.order()),
        }
    }

    pub fn mean_energy(&self) -> f64 {
        self.points.iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order() as f64
    }

    /// Axis label of the level nearest to `v`.
    pub fn nearest_axis_label(&self, v: f64) -> usize {
        let mut best = 0;
        let mut best_d = f64::INFINITY;
        for (lab, &lvl) in self.axis_levels.iter().enumerate() {
            let d = (v - lvl).abs();
            if d < best_d {
                best_d = d;
                best = lab;
            }
        }
        best
    }

    /// Nearest constellation level along one real dimension.
    pub fn nearest_level(&self, v: f64) -> f64 {
        self.axis_levels[self.nearest_axis_label(v)]
    }

    /// Label of the constellation point nearest to `z`.
    pub fn nearest_label(&self, z: Complex64) -> usize {
        if self.is_real() {
            return self.nearest_axis_label(z.re);
        }
        let axis_bits = self.bits_per_symbol / 2;
        (self.nearest_axis_label(z.re) << axis_bits) | self.nearest_axis_label(z.im)
    }

    /// Label of `z` if it is exactly a constellation point.
    pub fn label_of(&self, z: Complex64) -> Option<usize> {
        self.points.iter().position(|p| (p - z).norm() < 1e-9)
    }

    pub fn map_bits(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let b = self.bits_per_symbol;
        if !bits.len().is_multiple_of(b) {
            return Err(Error::Length { len: bits.len(), bits_per_symbol: b });
        }
        Ok(bits
            .chunks(b)
            .map(|chunk| {
                let label = chunk.iter().fold(0usize, |acc, &bit| (acc << 1) | usize::from(bit & 1));
                self.points[label]
            })
            .collect())
    }

    /// Hard nearest-point demapping back to bits.
    pub fn demap_symbols(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol);
        for &z in symbols {
            self.push_label_bits(self.nearest_label(z), &mut out);
        }
        out
    }

    pub fn push_label_bits(&self, label: usize, out: &mut Vec<u8>) {
        for k in (0..self.bits_per_symbol).rev() {
            out.push(((label >> k) & 1) as u8);
        }
    }
}
