use super::lll::{lll_reduce, LatticeReduction, DEFAULT_DELTA};
use super::{coords_to_symbols, real_system, CondDiagnostic, DetectionResult};
use crate::channel::Constellation;
use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix, HouseholderQr, RealMatrix};
use crate::stcodes::realify_vec;

// Distance (in units of the lattice scale) beyond which a coordinate is out of the constellation.
const IN_SET_TOL: f64 = 1e-6;

/// What LR-aided ZF does with a decision outside the constellation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Clipping {
    /// Move it to the nearest constellation level.
    Clip,
    /// Mark the symbol erased.
    Erase,
}

fn observation(y: &[Complex64], rows: usize) -> Result<Vec<f64>> {
    let v = realify_vec(y);
    if v.len() != rows {
        return Err(Error::Shape(format!("receive vector of length {} against {} real rows", v.len(), rows)));
    }
    Ok(v)
}

// Symbol decisions from per-coordinate levels; `erased[k]` marks erased coordinates.
fn decide(levels: &[f64], erased: &[bool], p: usize, c: &Constellation) -> DetectionResult {
    let symbols = coords_to_symbols(levels, p, c);
    let labels = (0..p)
        .map(|k| {
            let gone = erased[k] || (!c.is_real() && erased[p + k]);
            (!gone).then(|| c.nearest_label(symbols[k]))
        })
        .collect();
    DetectionResult { symbols, labels, out_of_set: 0, diagnostic: None }
}

/// Zero forcing: least-squares solve of the real model, then per-dimension slicing.
#[derive(Debug, Clone)]
pub struct ZfDetector {
    qr: HouseholderQr,
    rows: usize,
    p: usize,
    c: Constellation,
}

impl ZfDetector {
    pub fn new(h: &ComplexMatrix, c: &Constellation) -> Result<Self> {
        let real = real_system(h, c);
        Ok(Self { qr: HouseholderQr::new(&real)?, rows: real.rows(), p: h.cols(), c: c.clone() })
    }

    pub fn detect(&self, y: &[Complex64]) -> Result<DetectionResult> {
        let x = self.qr.solve(&observation(y, self.rows)?)?;
        let levels: Vec<f64> = x.iter().map(|&v| self.c.nearest_level(v)).collect();
        Ok(decide(&levels, &vec![false; levels.len()], self.p, &self.c))
    }
}

pub fn zf_detect(y: &[Complex64], h: &ComplexMatrix, c: &Constellation) -> Result<DetectionResult> {
    ZfDetector::new(h, c)?.detect(y)
}

/// Lattice-reduction-aided ZF for one channel; the reduction is computed once
/// and reused for every block sent over that channel.
///
/// With `H_E = Q R` and lattice scale `C`, the decision is
/// `C (R^{-1} round(y~/C - R 1/2) + 1/2)` where `y~` solves `Q y~ = y` in the
/// least-squares sense.
#[derive(Debug, Clone)]
pub struct LrZfDetector {
    lr: LatticeReduction,
    qr: HouseholderQr,
    t: RealMatrix,
    r_half: Vec<f64>,
    rows: usize,
    p: usize,
    c: Constellation,
}

impl LrZfDetector {
    pub fn new(h: &ComplexMatrix, c: &Constellation) -> Result<Self> {
        let real = real_system(h, c);
        let lr = lll_reduce(&real, DEFAULT_DELTA)?;
        let n = real.cols();
        let r = lr.r.to_real();
        let r_half = r.mul_vec(&vec![0.5; n])?;
        Ok(Self {
            qr: HouseholderQr::new(&lr.q)?,
            t: lr.t.to_real(),
            lr,
            r_half,
            rows: real.rows(),
            p: h.cols(),
            c: c.clone(),
        })
    }

    pub fn reduction(&self) -> &LatticeReduction {
        &self.lr
    }

    pub fn detect(&self, y: &[Complex64], clipping: Clipping) -> Result<DetectionResult> {
        let scale = self.c.lattice_scale();
        let y_tilde = self.qr.solve(&observation(y, self.rows)?)?;
        let z: Vec<f64> = y_tilde.iter().zip(&self.r_half).map(|(v, s)| (v / scale - s).round()).collect();
        let back = self.t.mul_vec(&z)?;
        let raw: Vec<f64> = back.iter().map(|v| scale * (v + 0.5)).collect();
        let mut levels = Vec::with_capacity(raw.len());
        let mut erased = Vec::with_capacity(raw.len());
        let mut out_of_set = 0;
        for &v in &raw {
            let lvl = self.c.nearest_level(v);
            let outside = (v - lvl).abs() > IN_SET_TOL * scale;
            out_of_set += usize::from(outside);
            levels.push(lvl);
            erased.push(outside && clipping == Clipping::Erase);
        }
        let mut res = decide(&levels, &erased, self.p, &self.c);
        res.out_of_set = out_of_set;
        Ok(res)
    }
}

/// One-shot LR-aided ZF including condition numbers before and after reduction.
pub fn lr_zf_detect(y: &[Complex64], h: &ComplexMatrix, c: &Constellation, clipping: Clipping) -> Result<DetectionResult> {
    let det = LrZfDetector::new(h, c)?;
    let mut res = det.detect(y, clipping)?;
    res.diagnostic = Some(CondDiagnostic {
        before: super::condition_number(&real_system(h, c))?,
        after: super::condition_number(&det.lr.q)?,
    });
    Ok(res)
}
