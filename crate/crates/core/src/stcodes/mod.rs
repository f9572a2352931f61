//! Space-time encoders and their equivalent linear channel models.
//!
//! All models use the column-vector convention `y = H_eq x + n`. The physical
//! block model is `Y = G H^T + N` with time along the rows of `G` and `Y`;
//! conjugating the received samples of the time slots that carry conjugated
//! symbols turns it into the equivalent model without changing noise
//! statistics.

mod qstbc;

use std::fmt;
use std::str::FromStr;

pub use qstbc::{equivalent_channel_qstbc, qstbc_decompose, QstbcDecomposition, EVEN_SYMBOLS, ODD_SYMBOLS};

use crate::channel::{ChannelMatrix, Constellation};
use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, RealMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeKind {
    /// Horizontal concatenation of Alamouti blocks over `n_t = 2n` antennas.
    StackedOstbc,
    /// Rate-one quasi-orthogonal code for four antennas.
    Qstbc4,
    /// Independent symbol per antenna per channel use.
    SpatialMultiplexing,
    /// Two-antenna special case of the stacked scheme.
    Alamouti,
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::StackedOstbc => "stacked",
            Self::Qstbc4 => "qstbc",
            Self::SpatialMultiplexing => "sm",
            Self::Alamouti => "alamouti",
        })
    }
}

impl FromStr for SchemeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stacked" | "stacked_ostbc" | "ostbc" | "dsttd" => Ok(Self::StackedOstbc),
            "qstbc" | "qstbc4" => Ok(Self::Qstbc4),
            "sm" | "spatial_multiplexing" => Ok(Self::SpatialMultiplexing),
            "alamouti" => Ok(Self::Alamouti),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// A code for a fixed antenna count: block length `T`, `p` symbols per block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeScheme {
    kind: SchemeKind,
    n_t: usize,
    block_length: usize,
    symbols_per_block: usize,
}

impl CodeScheme {
    pub fn new(kind: SchemeKind, n_t: usize) -> Result<Self> {
        let (block_length, symbols_per_block) = match kind {
            SchemeKind::StackedOstbc => {
                if n_t == 0 || !n_t.is_multiple_of(2) {
                    return Err(Error::Shape(format!("stacked OSTBC needs an even n_t, got {n_t}")));
                }
                (2, n_t)
            }
            SchemeKind::Alamouti => {
                if n_t != 2 {
                    return Err(Error::Shape(format!("Alamouti needs n_t = 2, got {n_t}")));
                }
                (2, 2)
            }
            SchemeKind::Qstbc4 => {
                if n_t != 4 {
                    return Err(Error::Shape(format!("QSTBC is implemented for n_t = 4 only, got {n_t}")));
                }
                (4, 4)
            }
            SchemeKind::SpatialMultiplexing => {
                if n_t == 0 {
                    return Err(Error::Shape("spatial multiplexing needs n_t >= 1".into()));
                }
                (1, n_t)
            }
        };
        Ok(Self { kind, n_t, block_length, symbols_per_block })
    }

    pub fn kind(&self) -> SchemeKind {
        self.kind
    }

    pub fn n_t(&self) -> usize {
        self.n_t
    }

    /// `T`, channel uses per block.
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    /// `p`, symbols per block.
    pub fn symbols_per_block(&self) -> usize {
        self.symbols_per_block
    }

    /// `R = p / T` symbols per channel use.
    pub fn rate(&self) -> f64 {
        self.symbols_per_block as f64 / self.block_length as f64
    }

    /// Information bits per channel use with constellation `c`.
    pub fn spectral_efficiency(&self, c: &Constellation) -> f64 {
        self.rate() * c.bits_per_symbol() as f64
    }

    /// `T x n_t` transmit block for `p` symbols.
    pub fn encode(&self, x: &[Complex64]) -> Result<ComplexMatrix> {
        match self.kind {
            SchemeKind::StackedOstbc | SchemeKind::Alamouti => encode_stacked(x, self.n_t),
            SchemeKind::Qstbc4 => encode_qstbc4(x),
            SchemeKind::SpatialMultiplexing => encode_sm(x, self.n_t),
        }
    }

    /// Equivalent complex channel for this code.
    pub fn equivalent_channel(&self, h: &ChannelMatrix) -> Result<EquivalentChannel> {
        if h.n_t() != self.n_t {
            return Err(Error::Shape(format!("channel has {} transmit antennas, code needs {}", h.n_t(), self.n_t)));
        }
        match self.kind {
            SchemeKind::StackedOstbc | SchemeKind::Alamouti => {
                let mut eq = equivalent_channel_stacked(h)?;
                eq.scheme = self.kind;
                Ok(eq)
            }
            SchemeKind::Qstbc4 => equivalent_channel_qstbc(h),
            SchemeKind::SpatialMultiplexing => Ok(EquivalentChannel::spatial_multiplexing(h)),
        }
    }
}

/// `[[x1, x2], [x2*, -x1*]]`.
pub fn encode_alamouti(x1: Complex64, x2: Complex64) -> ComplexMatrix {
    ComplexMatrix::from_fn(2, 2, |t, j| match (t, j) {
        (0, 0) => x1,
        (0, 1) => x2,
        (1, 0) => x2.conj(),
        _ => -x1.conj(),
    })
}

/// Alamouti blocks side by side: `[G2(x1,x2), G2(x3,x4), ...]`.
pub fn encode_stacked(x: &[Complex64], n_t: usize) -> Result<ComplexMatrix> {
    if n_t == 0 || !n_t.is_multiple_of(2) {
        return Err(Error::Shape(format!("stacked OSTBC needs an even n_t, got {n_t}")));
    }
    if x.len() != n_t {
        return Err(Error::Shape(format!("stacked OSTBC carries {n_t} symbols, got {}", x.len())));
    }
    Ok(ComplexMatrix::from_fn(2, n_t, |t, j| {
        let base = j & !1;
        let (a, b) = (x[base], x[base + 1]);
        match (t, j % 2) {
            (0, 0) => a,
            (0, _) => b,
            (_, 0) => b.conj(),
            _ => -a.conj(),
        }
    }))
}

/// Four-antenna quasi-orthogonal block:
/// rows `(x1, x2, x3, x4)`, `(x2*, -x1*, x4*, -x3*)`, `(x3, -x4, -x1, x2)`, `(x4*, x3*, -x2*, -x1*)`.
pub fn encode_qstbc4(x: &[Complex64]) -> Result<ComplexMatrix> {
    if x.len() != 4 {
        return Err(Error::Shape(format!("QSTBC carries 4 symbols, got {}", x.len())));
    }
    let (x1, x2, x3, x4) = (x[0], x[1], x[2], x[3]);
    ComplexMatrix::from_rows(&[
        vec![x1, x2, x3, x4],
        vec![x2.conj(), -x1.conj(), x4.conj(), -x3.conj()],
        vec![x3, -x4, -x1, x2],
        vec![x4.conj(), x3.conj(), -x2.conj(), -x1.conj()],
    ])
}

/// Single-row block: one symbol per antenna.
pub fn encode_sm(x: &[Complex64], n_t: usize) -> Result<ComplexMatrix> {
    if x.len() != n_t {
        return Err(Error::Shape(format!("spatial multiplexing carries {n_t} symbols, got {}", x.len())));
    }
    ComplexMatrix::new(1, n_t, x.to_vec())
}

/// Physical block model `Y = G H^T + N` (`T x n_r`).
pub fn transmit_block(g: &ComplexMatrix, h: &ChannelMatrix, noise: Option<&ComplexMatrix>) -> Result<ComplexMatrix> {
    let y = g.matmul(&h.matrix().transpose())?;
    match noise {
        Some(n) => y.add(n),
        None => Ok(y),
    }
}

/// Linear model `y = H_eq x + n` equivalent to a block code on a given channel.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalentChannel {
    pub scheme: SchemeKind,
    /// Complex `rows x p` matrix.
    pub complex: ComplexMatrix,
    /// Time slots whose received samples are conjugated before stacking.
    pub conjugated_slots: Vec<usize>,
    /// Ratio of per-entry noise variance in the equivalent model to the
    /// physical one (1 for every code here: conjugation keeps AWGN white).
    pub noise_gain: f64,
}

impl EquivalentChannel {
    fn spatial_multiplexing(h: &ChannelMatrix) -> Self {
        Self {
            scheme: SchemeKind::SpatialMultiplexing,
            complex: h.matrix().clone(),
            conjugated_slots: Vec::new(),
            noise_gain: 1.0,
        }
    }

    /// Block length `T` this model expects from the physical receiver.
    pub fn block_length(&self) -> usize {
        self.complex.rows() / self.n_r()
    }

    fn n_r(&self) -> usize {
        match self.scheme {
            SchemeKind::StackedOstbc | SchemeKind::Alamouti => self.complex.rows() / 2,
            SchemeKind::Qstbc4 => self.complex.rows() / 4,
            SchemeKind::SpatialMultiplexing => self.complex.rows(),
        }
    }

    /// Stacks a physical `T x n_r` receive block into the equivalent receive
    /// vector: for each receive antenna the `T` time samples in order, with
    /// the conjugated slots conjugated.
    pub fn stack_received(&self, y: &ComplexMatrix) -> Result<Vec<Complex64>> {
        let t_len = self.block_length();
        if y.rows() != t_len || y.cols() != self.n_r() {
            return Err(Error::Shape(format!(
                "receive block {}x{} does not match T={} n_r={}",
                y.rows(),
                y.cols(),
                t_len,
                self.n_r()
            )));
        }
        let mut out = Vec::with_capacity(t_len * self.n_r());
        for i in 0..self.n_r() {
            for t in 0..t_len {
                let v = y[(t, i)];
                out.push(if self.conjugated_slots.contains(&t) { v.conj() } else { v });
            }
        }
        Ok(out)
    }

    /// Real model acting on stacked `(Re x; Im x)`, or on `Re x` alone for a real constellation.
    pub fn real_model(&self, c: &Constellation) -> RealMatrix {
        let full = realify(&self.complex);
        if c.is_real() {
            let p = self.complex.cols();
            full.select_cols(&(0..p).collect::<Vec<_>>())
        } else {
            full
        }
    }
}

/// Equivalent channel of the stacked scheme: per receive antenna `i` the rows
/// `(h_i1, h_i2, h_i3, h_i4, ...)` and `(-h_i2*, h_i1*, -h_i4*, h_i3*, ...)`.
pub fn equivalent_channel_stacked(h: &ChannelMatrix) -> Result<EquivalentChannel> {
    let (n_r, n_t) = (h.n_r(), h.n_t());
    if n_t % 2 != 0 {
        return Err(Error::Shape(format!("stacked OSTBC needs an even n_t, got {n_t}")));
    }
    let complex = ComplexMatrix::from_fn(2 * n_r, n_t, |row, j| {
        let i = row / 2;
        if row % 2 == 0 {
            h.gain(i, j)
        } else if j % 2 == 0 {
            -h.gain(i, j + 1).conj()
        } else {
            h.gain(i, j - 1).conj()
        }
    });
    let scheme = if n_t == 2 { SchemeKind::Alamouti } else { SchemeKind::StackedOstbc };
    Ok(EquivalentChannel { scheme, complex, conjugated_slots: vec![1], noise_gain: 1.0 })
}

/// `[[Re M, -Im M], [Im M, Re M]]`, acting on `(Re x; Im x)`.
pub fn realify(m: &ComplexMatrix) -> RealMatrix {
    let (r, c) = m.shape();
    RealMatrix::from_fn(2 * r, 2 * c, |i, j| {
        let z = m[(i % r, j % c)];
        match (i < r, j < c) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    })
}

/// Real model of spatial multiplexing in the column convention.
pub fn realify_sm(h: &ChannelMatrix) -> RealMatrix {
    realify(h.matrix())
}

/// `(Re z; Im z)`.
pub fn realify_vec(z: &[Complex64]) -> Vec<f64> {
    z.iter().map(|v| v.re).chain(z.iter().map(|v| v.im)).collect()
}

/// Inverse of [`realify_vec`].
pub fn complexify_vec(v: &[f64]) -> Vec<Complex64> {
    let n = v.len() / 2;
    (0..n).map(|k| Complex64::new(v[k], v[n + k])).collect()
}

/// Odd rows of the stacked equivalent channel (the physical channel `H`) and
/// even rows (`H_e`).
pub fn split_stacked_rows(eq: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let n_r = eq.rows() / 2;
    let odd: Vec<usize> = (0..n_r).map(|i| 2 * i).collect();
    let even: Vec<usize> = (0..n_r).map(|i| 2 * i + 1).collect();
    (eq.select_rows(&odd), eq.select_rows(&even))
}

/// `J = I_{n/2} (x) [[0, 1], [-1, 0]]`.
pub fn alamouti_rotation(n_t: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n_t, n_t, |i, j| {
        let v = if i / 2 != j / 2 {
            0.0
        } else if i % 2 == 0 && j % 2 == 1 {
            1.0
        } else if i % 2 == 1 && j % 2 == 0 {
            -1.0
        } else {
            0.0
        };
        Complex64::new(v, 0.0)
    })
}
