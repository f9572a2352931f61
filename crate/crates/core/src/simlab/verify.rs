use rand::Rng;
use rand_distr::StandardNormal;

use super::spec::{parse_spec, ExperimentSpec};
use super::table::ResultTable;
use crate::channel::{
    draw_noise, trial_rng, ChannelMatrix, Constellation, ConstellationKind, StreamPurpose, SystemConfig,
};
use crate::detect::{condition_number_complex, lll_reduce, ml_detect, BlockDetector, DetectorKind, DEFAULT_DELTA};
use crate::inforate::{cap_upper_ergodic, ergodic_mc, instantaneous_capacity, rate_stacked, MC_CONFIDENCE_SE};
use crate::numerics::{Complex64, RealMatrix};
use crate::stcodes::{equivalent_channel_stacked, transmit_block, CodeScheme, SchemeKind};

/// Outcome of one invariant check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type CheckResult = std::result::Result<String, String>;
type CheckFn = fn() -> CheckResult;

fn seed_rng(tag: u64) -> rand_chacha::ChaCha8Rng {
    trial_rng(0x5eed, tag, StreamPurpose::Auxiliary)
}

fn stacked_rate_is_capacity_at_one_rx() -> CheckResult {
    let mut rng = seed_rng(1);
    let mut worst = 0.0f64;
    for n_t in [2, 4, 8] {
        for _ in 0..1000 {
            let h = ChannelMatrix::random(1, n_t, &mut rng);
            let d = (rate_stacked(&h, 10.0).map_err(|e| e.to_string())?
                - instantaneous_capacity(&h, 10.0).map_err(|e| e.to_string())?)
            .abs();
            worst = worst.max(d);
        }
    }
    if worst < 1e-10 { Ok(format!("max deviation {worst:.1e}")) } else { Err(format!("max deviation {worst:.3e}")) }
}

fn rate_sandwich() -> CheckResult {
    let mut rng = seed_rng(2);
    for (n_t, n_r) in [(4, 2), (4, 4), (8, 3)] {
        for _ in 0..1000 {
            let h = ChannelMatrix::random(n_r, n_t, &mut rng);
            let c = instantaneous_capacity(&h, 100.0).map_err(|e| e.to_string())?;
            let r = rate_stacked(&h, 100.0).map_err(|e| e.to_string())?;
            if !(0.5 * c <= r + 1e-12 && r < c) {
                return Err(format!("{n_t}x{n_r}: C = {c}, I_sA = {r}"));
            }
        }
    }
    Ok("C/2 <= I_sA < C on 3000 samples".into())
}

fn siso_ergodic_closed_form() -> CheckResult {
    let cfg = SystemConfig::new(1, 1, vec![10.0], 77).map_err(|e| e.to_string())?;
    let est = ergodic_mc(&cfg, 20_000, instantaneous_capacity).map_err(|e| e.to_string())?[0];
    let exact = cap_upper_ergodic(1, 1, 10.0).map_err(|e| e.to_string())?;
    let z = (est.mean - exact) / est.std_error;
    if z.abs() <= MC_CONFIDENCE_SE { Ok(format!("z = {z:.2}")) } else { Err(format!("z = {z:.2}")) }
}

fn lll_invariants() -> CheckResult {
    let mut rng = seed_rng(3);
    for n in [4, 8] {
        for k in 0..500 {
            let b = RealMatrix::from_fn(n, n, |_, _| rng.sample(StandardNormal));
            let lr = lll_reduce(&b, DEFAULT_DELTA).map_err(|e| e.to_string())?;
            lr.check(&b, 1e-9).map_err(|e| format!("{n}x{n} sample {k}: {e}"))?;
        }
    }
    Ok("1000 random bases".into())
}

fn ml_matches_enumeration() -> CheckResult {
    let mut rng = seed_rng(4);
    let c = Constellation::new(ConstellationKind::Qam4);
    for _ in 0..200 {
        let h = ChannelMatrix::random(2, 2, &mut rng).matrix().clone();
        let y: Vec<Complex64> = (0..2).map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))).collect();
        let mut best = (0, 0, f64::INFINITY);
        for a in 0..4 {
            for b in 0..4 {
                let hx = h.mul_vec(&[c.points()[a], c.points()[b]]).map_err(|e| e.to_string())?;
                let d: f64 = y.iter().zip(&hx).map(|(u, v)| (u - v).norm_sqr()).sum();
                if d < best.2 {
                    best = (a, b, d);
                }
            }
        }
        let got = ml_detect(&y, &h, &c).map_err(|e| e.to_string())?.labels;
        if got != vec![Some(best.0), Some(best.1)] {
            return Err(format!("ML chose {got:?}, enumeration ({}, {})", best.0, best.1));
        }
    }
    Ok("200 trials".into())
}

fn physical_model_agrees() -> CheckResult {
    let mut rng = seed_rng(5);
    for (kind, ck) in [(SchemeKind::StackedOstbc, ConstellationKind::Qam4), (SchemeKind::Qstbc4, ConstellationKind::Qam16)] {
        let c = Constellation::new(ck);
        let scheme = CodeScheme::new(kind, 4).map_err(|e| e.to_string())?;
        for _ in 0..100 {
            let h = ChannelMatrix::random(4, 4, &mut rng);
            let x: Vec<Complex64> = (0..4).map(|_| c.points()[rng.random_range(0..c.order())]).collect();
            let g = scheme.encode(&x).map_err(|e| e.to_string())?;
            let noise = draw_noise(g.rows(), 4, 8.0, 4, &mut rng);
            let y_block = transmit_block(&g, &h, Some(&noise)).map_err(|e| e.to_string())?;
            let eq = scheme.equivalent_channel(&h).map_err(|e| e.to_string())?;
            let y = eq.stack_received(&y_block).map_err(|e| e.to_string())?;
            let full = ml_detect(&y, &eq.complex, &c).map_err(|e| e.to_string())?;
            let det = BlockDetector::new(&scheme, &h, &c, DetectorKind::Ml).map_err(|e| e.to_string())?;
            if det.detect(&y).map_err(|e| e.to_string())?.labels != full.labels {
                return Err(format!("{kind}: block detector disagrees with ML on the full model"));
            }
        }
    }
    Ok("200 blocks".into())
}

fn stacked_single_rx_orthogonal() -> CheckResult {
    let mut rng = seed_rng(6);
    for n_t in [2, 4, 8] {
        for _ in 0..200 {
            let eq = equivalent_channel_stacked(&ChannelMatrix::random(1, n_t, &mut rng)).map_err(|e| e.to_string())?;
            let k = condition_number_complex(&eq.complex).map_err(|e| e.to_string())?;
            if (k - 1.0).abs() > 1e-9 {
                return Err(format!("n_t = {n_t}: cond = {k}"));
            }
        }
    }
    Ok("cond = 1 on 600 samples".into())
}

fn round_trips() -> CheckResult {
    for (name, text) in super::bundled_experiments() {
        let spec = parse_spec(text).map_err(|e| format!("{name}: {e}"))?;
        let again: ExperimentSpec = parse_spec(&spec.to_spec_string()).map_err(|e| e.to_string())?;
        if again != spec {
            return Err(format!("{name} does not round-trip"));
        }
    }
    let mut t = ResultTable::new("snr_db");
    for k in 0..20 {
        t.push(k as f64 * 0.1, "m", (k as f64).sqrt() / 3.0, 1e-3 / (k + 1) as f64, 10).map_err(|e| e.to_string())?;
    }
    let back = ResultTable::read_csv(t.to_csv_string().as_bytes()).map_err(|e| e.to_string())?;
    if back.rows() != t.rows() {
        return Err("CSV table does not reload identically".into());
    }
    Ok("bundled specs and CSV".into())
}

/// Fast invariant suite behind `stcsim verify`.
pub fn verify_suite() -> Vec<Check> {
    let checks: [(&'static str, CheckFn); 8] = [
        ("stacked rate equals capacity at n_r = 1", stacked_rate_is_capacity_at_one_rx),
        ("half capacity <= stacked rate < capacity", rate_sandwich),
        ("SISO ergodic capacity closed form", siso_ergodic_closed_form),
        ("LLL invariants", lll_invariants),
        ("ML equals enumeration", ml_matches_enumeration),
        ("equivalent and physical models agree", physical_model_agrees),
        ("stacked channel orthogonal at n_r = 1", stacked_single_rx_orthogonal),
        ("spec and CSV round trips", round_trips),
    ];
    checks
        .into_iter()
        .map(|(name, f)| match f() {
            Ok(detail) => Check { name, passed: true, detail },
            Err(detail) => Check { name, passed: false, detail },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    #[test]
    fn suite_passes() {
        for c in super::verify_suite() {
            assert!(c.passed, "{}: {}", c.name, c.detail);
        }
    }
}
