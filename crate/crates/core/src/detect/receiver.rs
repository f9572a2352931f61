use super::linear::{Clipping, LrZfDetector, ZfDetector};
use super::ml::{ml_detect, ml_detect_stacked};
use super::{DetectionResult, DetectorKind};
use crate::channel::{ChannelMatrix, Constellation};
use crate::error::Result;
use crate::numerics::{Complex64, ComplexMatrix};
use crate::stcodes::{CodeScheme, QstbcDecomposition, SchemeKind};

#[derive(Debug, Clone)]
enum Inner {
    Ml(ComplexMatrix),
    StackedMl(ComplexMatrix),
    Zf(ZfDetector),
    LrZf(LrZfDetector, Clipping),
}

impl Inner {
    fn new(h: &ComplexMatrix, stacked: bool, kind: DetectorKind, c: &Constellation) -> Result<Self> {
        Ok(match kind {
            DetectorKind::Ml if stacked => Self::StackedMl(h.clone()),
            DetectorKind::Ml => Self::Ml(h.clone()),
            DetectorKind::Zf => Self::Zf(ZfDetector::new(h, c)?),
            DetectorKind::LrZf => Self::LrZf(LrZfDetector::new(h, c)?, Clipping::Clip),
            DetectorKind::LrZfNoClip => Self::LrZf(LrZfDetector::new(h, c)?, Clipping::Erase),
        })
    }

    fn detect(&self, y: &[Complex64], c: &Constellation) -> Result<DetectionResult> {
        match self {
            Self::Ml(h) => ml_detect(y, h, c),
            Self::StackedMl(h) => ml_detect_stacked(y, h, c),
            Self::Zf(d) => d.detect(y),
            Self::LrZf(d, clip) => d.detect(y, *clip),
        }
    }
}

/// Detector for every block sent over one channel realization.
///
/// Stacked codes are detected on the full equivalent channel (with the exact
/// structured ML); QSTBC is split into its two whitened 2x2 subsystems, each
/// detected on its own.
#[derive(Debug, Clone)]
pub struct BlockDetector {
    constellation: Constellation,
    inner: Inner,
    qstbc: Option<QstbcDecomposition>,
}

impl BlockDetector {
    pub fn new(scheme: &CodeScheme, h: &ChannelMatrix, c: &Constellation, kind: DetectorKind) -> Result<Self> {
        if scheme.kind() == SchemeKind::Qstbc4 {
            let d = crate::stcodes::qstbc_decompose(h)?;
            let inner = Inner::new(&d.h_eq, false, kind, c)?;
            return Ok(Self { constellation: c.clone(), inner, qstbc: Some(d) });
        }
        let eq = scheme.equivalent_channel(h)?;
        let stacked = matches!(scheme.kind(), SchemeKind::StackedOstbc | SchemeKind::Alamouti);
        let inner = Inner::new(&eq.complex, stacked, kind, c)?;
        Ok(Self { constellation: c.clone(), inner, qstbc: None })
    }

    /// Decisions for one stacked receive vector, in the code's symbol order.
    pub fn detect(&self, y: &[Complex64]) -> Result<DetectionResult> {
        let c = &self.constellation;
        let Some(d) = &self.qstbc else {
            return self.inner.detect(y, c);
        };
        let (yo, ye) = d.split(y)?;
        let (ro, re) = (self.inner.detect(&yo, c)?, self.inner.detect(&ye, c)?);
        let symbols = QstbcDecomposition::merge([ro.symbols[0], ro.symbols[1]], [re.symbols[0], re.symbols[1]]);
        let mut labels = vec![None; 4];
        for k in 0..2 {
            labels[crate::stcodes::ODD_SYMBOLS[k]] = ro.labels[k];
            labels[crate::stcodes::EVEN_SYMBOLS[k]] = re.labels[k];
        }
        Ok(DetectionResult { symbols: symbols.to_vec(), labels, out_of_set: ro.out_of_set + re.out_of_set, diagnostic: None })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_noise, trial_rng, ConstellationKind, StreamPurpose};
    use crate::stcodes::transmit_block;
    use rand::Rng;

    // Decisions on the physical block model Y = G H^T + N must match ML on the
    // full equivalent channel.
    #[test]
    fn physical_and_equivalent_models_agree() {
        let mut rng = trial_rng(31, 0, StreamPurpose::Auxiliary);
        let cases = [
            (SchemeKind::StackedOstbc, 4, ConstellationKind::Qam4),
            (SchemeKind::Qstbc4, 4, ConstellationKind::Qam4),
            (SchemeKind::SpatialMultiplexing, 4, ConstellationKind::Bpsk),
        ];
        for (kind, n_t, ck) in cases {
            let c = Constellation::new(ck);
            let scheme = CodeScheme::new(kind, n_t).unwrap();
            for _ in 0..200 {
                let h = ChannelMatrix::random(2, n_t, &mut rng);
                let labels: Vec<usize> = (0..scheme.symbols_per_block()).map(|_| rng.random_range(0..c.order())).collect();
                let x: Vec<Complex64> = labels.iter().map(|&l| c.points()[l]).collect();
                let g = scheme.encode(&x).unwrap();
                let noise = draw_noise(g.rows(), 2, 6.0, n_t, &mut rng);
                let y_block = transmit_block(&g, &h, Some(&noise)).unwrap();
                let eq = scheme.equivalent_channel(&h).unwrap();
                let y = eq.stack_received(&y_block).unwrap();
                let full = ml_detect(&y, &eq.complex, &c).unwrap();
                let det = BlockDetector::new(&scheme, &h, &c, DetectorKind::Ml).unwrap();
                assert_eq!(det.detect(&y).unwrap().labels, full.labels, "{kind}");
            }
        }
    }
}
