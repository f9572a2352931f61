use super::DetectionResult;
use crate::channel::Constellation;
use crate::error::{Error, Result};
use crate::numerics::{Complex64, ComplexMatrix};

/// Largest candidate set the exhaustive search accepts.
pub const ML_MAX_CANDIDATES: u128 = 1 << 20;

fn check_space(order: usize, dims: usize) -> Result<()> {
    let size = (order as u128).checked_pow(dims as u32).unwrap_or(u128::MAX);
    if size > ML_MAX_CANDIDATES {
        return Err(Error::SearchSpaceTooLarge { size, limit: ML_MAX_CANDIDATES });
    }
    Ok(())
}

fn check_shapes(y: &[Complex64], h: &ComplexMatrix) -> Result<()> {
    if y.len() != h.rows() {
        return Err(Error::Shape(format!("receive vector of length {} against {} rows", y.len(), h.rows())));
    }
    Ok(())
}

// Depth-first search over symbols `first..p` in lexicographic label order,
// starting from residual `base`. Returns the best labels and metric; ties keep
// the earlier candidate.
fn search(base: &[Complex64], h: &ComplexMatrix, first: usize, c: &Constellation) -> (Vec<usize>, f64) {
    let p = h.cols();
    let m = h.rows();
    let pts = c.points();
    let cols: Vec<Vec<Complex64>> = (0..p).map(|j| h.column(j)).collect();
    let col_norm: Vec<f64> = cols.iter().map(|v| v.iter().map(|z| z.norm_sqr()).sum()).collect();
    let residual_norm = |r: &[Complex64]| r.iter().map(|z| z.norm_sqr()).sum::<f64>();

    if first == p {
        return (Vec::new(), residual_norm(base));
    }
    let depth = p - first;
    // residual[d] is the residual with symbols first..first+d assigned
    let mut residual = vec![base.to_vec(); depth];
    let mut labels = vec![0usize; depth];
    let mut best = (vec![0usize; depth], f64::INFINITY);
    let last = p - 1;

    let mut level = 0;
    loop {
        if level + 1 == depth {
            // closed-form leaf metric: |r - h x|^2 = |r|^2 - 2 Re(x* h^H r) + |x|^2 |h|^2
            let r = &residual[level];
            let rn = residual_norm(r);
            let corr: Complex64 = (0..m).map(|i| cols[last][i].conj() * r[i]).sum();
            for (lab, x) in pts.iter().enumerate() {
                let metric = rn - 2.0 * (x.conj() * corr).re + x.norm_sqr() * col_norm[last];
                if metric < best.1 {
                    labels[level] = lab;
                    best = (labels.clone(), metric);
                }
            }
            // backtrack
            loop {
                if level == 0 {
                    return best;
                }
                level -= 1;
                labels[level] += 1;
                if labels[level] < pts.len() {
                    break;
                }
            }
        }
        // descend: apply symbol `labels[level]` at column first+level
        let j = first + level;
        let x = pts[labels[level]];
        let (head, tail) = residual.split_at_mut(level + 1);
        for i in 0..m {
            tail[0][i] = head[level][i] - cols[j][i] * x;
        }
        level += 1;
        labels[level] = 0;
    }
}

/// Exhaustive ML: `argmin_x |y - H x|^2` over all symbol vectors, ties broken
/// in favour of the lexicographically smallest label vector.
pub fn ml_detect(y: &[Complex64], h: &ComplexMatrix, c: &Constellation) -> Result<DetectionResult> {
    check_shapes(y, h)?;
    check_space(c.order(), h.cols())?;
    let (labels, _) = search(y, h, 0, c);
    Ok(DetectionResult::from_labels(labels, c))
}

/// Exact ML for an equivalent channel whose first two columns are orthogonal
/// with equal norm, as in every stacked Alamouti model.
///
/// The remaining symbols are enumerated; for each hypothesis the first block
/// decouples and its two symbols are the nearest points to `(A^H r)_k / |a|^2`.
pub fn ml_detect_stacked(y: &[Complex64], h: &ComplexMatrix, c: &Constellation) -> Result<DetectionResult> {
    check_shapes(y, h)?;
    let p = h.cols();
    if p < 2 {
        return Err(Error::Shape("stacked ML needs at least two symbols".into()));
    }
    check_space(c.order(), p - 2)?;
    let a = [h.column(0), h.column(1)];
    let lambda: f64 = a[0].iter().map(|z| z.norm_sqr()).sum();
    let cross: Complex64 = a[0].iter().zip(&a[1]).map(|(u, v)| u.conj() * v).sum();
    let lambda1: f64 = a[1].iter().map(|z| z.norm_sqr()).sum();
    let scale = lambda.max(lambda1).max(f64::MIN_POSITIVE);
    if cross.norm() > 1e-9 * scale || (lambda - lambda1).abs() > 1e-9 * scale {
        return Err(Error::Shape("first two columns are not an Alamouti block".into()));
    }
    if lambda <= 0.0 {
        return Err(Error::RankDeficient);
    }
    let rest: Vec<Vec<Complex64>> = (2..p).map(|j| h.column(j)).collect();
    let pts = c.points();
    let m = h.rows();

    let mut best: Option<(Vec<usize>, f64)> = None;
    let mut rest_labels = vec![0usize; p - 2];
    let total = (c.order() as u128).pow((p - 2) as u32);
    for _ in 0..total {
        let mut r = y.to_vec();
        for (j, &lab) in rest_labels.iter().enumerate() {
            let x = pts[lab];
            for i in 0..m {
                r[i] -= rest[j][i] * x;
            }
        }
        let mut head = [0usize; 2];
        for k in 0..2 {
            let z: Complex64 = (0..m).map(|i| a[k][i].conj() * r[i]).sum::<Complex64>() / lambda;
            head[k] = nearest_point(pts, z);
        }
        let metric: f64 = (0..m)
            .map(|i| (r[i] - a[0][i] * pts[head[0]] - a[1][i] * pts[head[1]]).norm_sqr())
            .sum();
        if best.as_ref().is_none_or(|b| metric < b.1) {
            best = Some(([head[0], head[1]].into_iter().chain(rest_labels.iter().copied()).collect(), metric));
        }
        // next hypothesis, last symbol fastest
        for lab in rest_labels.iter_mut().rev() {
            *lab += 1;
            if *lab < pts.len() {
                break;
            }
            *lab = 0;
        }
    }
    Ok(DetectionResult::from_labels(best.expect("at least one hypothesis").0, c))
}

fn nearest_point(pts: &[Complex64], z: Complex64) -> usize {
    let mut best = (0, f64::INFINITY);
    for (lab, p) in pts.iter().enumerate() {
        let d = (z - p).norm_sqr();
        if d < best.1 {
            best = (lab, d);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{complex_gaussian, trial_rng, ChannelMatrix, ConstellationKind, StreamPurpose};
    use crate::stcodes::equivalent_channel_stacked;
    use rand::Rng;

    // Independent brute force: enumerate label vectors as base-M counters.
    fn brute_force(y: &[Complex64], h: &ComplexMatrix, c: &Constellation) -> Vec<usize> {
        let p = h.cols();
        let m = c.order();
        let mut best = (Vec::new(), f64::INFINITY);
        for idx in 0..m.pow(p as u32) {
            let labels: Vec<usize> = (0..p).map(|k| (idx / m.pow((p - 1 - k) as u32)) % m).collect();
            let x: Vec<Complex64> = labels.iter().map(|&l| c.points()[l]).collect();
            let hx = h.mul_vec(&x).unwrap();
            let d: f64 = y.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum();
            if d < best.1 {
                best = (labels, d);
            }
        }
        best.0
    }

    #[test]
    fn identity_channel_recovers_points() {
        let c = Constellation::new(ConstellationKind::Qam16);
        let h = ComplexMatrix::identity(2);
        let x = vec![c.points()[3], c.points()[12]];
        assert_eq!(ml_detect(&x, &h, &c).unwrap().labels, vec![Some(3), Some(12)]);
        let half_min = Constellation::qam_scale(16) / 2.0;
        let y = vec![x[0] + Complex64::new(0.9 * half_min, 0.0), x[1] + Complex64::new(0.0, -0.9 * half_min)];
        assert_eq!(ml_detect(&y, &h, &c).unwrap().labels, vec![Some(3), Some(12)]);
    }

    #[test]
    fn matches_brute_force() {
        let c = Constellation::new(ConstellationKind::Qam4);
        let mut rng = trial_rng(11, 0, StreamPurpose::Auxiliary);
        for _ in 0..1000 {
            let h = ChannelMatrix::random(2, 2, &mut rng).matrix().clone();
            let y: Vec<Complex64> = (0..2).map(|_| complex_gaussian(&mut rng) * 1.5).collect();
            let got: Vec<usize> = ml_detect(&y, &h, &c).unwrap().labels.into_iter().map(Option::unwrap).collect();
            assert_eq!(got, brute_force(&y, &h, &c));
        }
    }

    #[test]
    fn ties_resolve_to_lexicographic_first() {
        let c = Constellation::new(ConstellationKind::Bpsk);
        // both symbols are invisible, every candidate ties
        let h = ComplexMatrix::zeros(2, 2);
        let y = vec![Complex64::new(1.0, 0.0); 2];
        assert_eq!(ml_detect(&y, &h, &c).unwrap().labels, vec![Some(0), Some(0)]);
    }

    #[test]
    fn guard_trips_on_large_spaces() {
        let c = Constellation::new(ConstellationKind::Qam16);
        let h = ComplexMatrix::identity(6);
        let y = vec![Complex64::new(0.0, 0.0); 6];
        assert!(matches!(ml_detect(&y, &h, &c), Err(Error::SearchSpaceTooLarge { .. })));
    }

    #[test]
    fn structured_stacked_ml_equals_exhaustive() {
        let mut rng = trial_rng(12, 0, StreamPurpose::Auxiliary);
        for kind in [ConstellationKind::Bpsk, ConstellationKind::Qam4, ConstellationKind::Qam16] {
            let c = Constellation::new(kind);
            for n_t in [2, 4] {
                for _ in 0..300 {
                    let h = ChannelMatrix::random(2, n_t, &mut rng);
                    let eq = equivalent_channel_stacked(&h).unwrap().complex;
                    let x: Vec<Complex64> = (0..n_t).map(|_| c.points()[rng.random_range(0..c.order())]).collect();
                    let mut y = eq.mul_vec(&x).unwrap();
                    for v in y.iter_mut() {
                        *v += complex_gaussian(&mut rng) * 0.7;
                    }
                    let fast = ml_detect_stacked(&y, &eq, &c).unwrap();
                    let slow = ml_detect(&y, &eq, &c).unwrap();
                    assert_eq!(fast.labels, slow.labels);
                }
            }
        }
    }

    #[test]
    fn structured_ml_rejects_non_alamouti_head() {
        let c = Constellation::new(ConstellationKind::Qam4);
        let h = ComplexMatrix::from_rows(&[
            vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)],
            vec![Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)],
        ])
        .unwrap();
        assert!(ml_detect_stacked(&[Complex64::new(0.0, 0.0); 2], &h, &c).is_err());
    }
}
