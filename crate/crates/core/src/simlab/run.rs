use super::ber::{simulate_ber, Link};
use super::spec::{Antennas, ExperimentKind, ExperimentSpec, SchemeSpec};
use super::table::ResultTable;
use crate::channel::{db_to_linear, ChannelMatrix, Constellation, SystemConfig};
use crate::detect::{cond_histogram, DetectorKind, ML_MAX_CANDIDATES};
use crate::error::{Error, Result};
use crate::inforate::{
    abs_loss_bounds, all_bound_curves, ergodic_mc_many, instantaneous_capacity, rate_stacked, ratio_bounds, Quantity,
};
use crate::stcodes::{CodeScheme, SchemeKind};

pub const MIN_TRIALS: usize = 100;
pub const MIN_COND_TRIALS: usize = 1000;

fn config_err(msg: String) -> Error {
    Error::Config(msg)
}

/// Candidates the ML detector enumerates for one block of `scheme`.
fn ml_search_size(s: &SchemeSpec, n_t: usize) -> u128 {
    let m = s.constellation.order() as u128;
    let free = match s.scheme {
        SchemeKind::StackedOstbc | SchemeKind::Alamouti => n_t.saturating_sub(2),
        SchemeKind::Qstbc4 => 2,
        SchemeKind::SpatialMultiplexing => n_t,
    };
    m.checked_pow(free as u32).unwrap_or(u128::MAX)
}

/// Checks every constraint `run_experiment` relies on, naming the first one violated.
pub fn validate(spec: &ExperimentSpec) -> Result<()> {
    let min = if spec.kind == ExperimentKind::CondPdf { MIN_COND_TRIALS } else { MIN_TRIALS };
    if spec.trials < min {
        return Err(config_err(format!("trials = {} is below the minimum of {min} for {}", spec.trials, spec.kind)));
    }
    if spec.antennas.is_empty() {
        return Err(config_err("at least one antenna configuration is required".into()));
    }
    for a in &spec.antennas {
        if a.n_t == 0 || a.n_r == 0 {
            return Err(config_err(format!("antenna counts must be positive, got {a}")));
        }
    }
    if spec.kind != ExperimentKind::CondPdf {
        if spec.snr_db.is_empty() {
            return Err(config_err("the SNR grid is empty".into()));
        }
        SystemConfig::new(1, 1, spec.snr_db.clone(), spec.seed)?;
    }
    match spec.kind {
        ExperimentKind::ErgodicRates | ExperimentKind::Ratio | ExperimentKind::AbsLoss => {
            if let Some(a) = spec.antennas.iter().find(|a| a.n_t % 2 != 0) {
                return Err(config_err(format!("the stacked rate needs an even n_t, got {a}")));
            }
        }
        ExperimentKind::CondPdf => {
            if spec.schemes.is_empty() {
                return Err(config_err("COND_PDF needs at least one scheme".into()));
            }
            if spec.bins == 0 || !(spec.max_ln_cond > 0.0 && spec.max_ln_cond.is_finite()) {
                return Err(config_err("COND_PDF needs bins > 0 and max_ln_cond > 0".into()));
            }
            for a in &spec.antennas {
                for s in &spec.schemes {
                    CodeScheme::new(s.scheme, a.n_t).map_err(|e| config_err(format!("{s} at {a}: {e}")))?;
                    if s.scheme == SchemeKind::SpatialMultiplexing && a.n_r < a.n_t {
                        return Err(config_err(format!("{s} at {a}: the SM basis needs n_r >= n_t")));
                    }
                }
            }
        }
        ExperimentKind::Ber => {
            if spec.schemes.is_empty() || spec.detectors.is_empty() {
                return Err(config_err("BER needs at least one scheme and one detector".into()));
            }
            if spec.blocks_per_channel == 0 {
                return Err(config_err("blocks_per_channel must be positive".into()));
            }
            for a in &spec.antennas {
                let mut efficiency: Option<(SchemeSpec, f64)> = None;
                for s in &spec.schemes {
                    let code = CodeScheme::new(s.scheme, a.n_t).map_err(|e| config_err(format!("{s} at {a}: {e}")))?;
                    let se = code.spectral_efficiency(&Constellation::new(s.constellation));
                    match efficiency {
                        Some((first, v)) if (v - se).abs() > 1e-12 => {
                            return Err(config_err(format!(
                                "rate mismatch at {a}: {first} carries {v} bit/s/Hz but {s} carries {se}"
                            )))
                        }
                        None => efficiency = Some((*s, se)),
                        _ => {}
                    }
                    for d in &spec.detectors {
                        let zf_family = matches!(d, DetectorKind::Zf | DetectorKind::LrZf | DetectorKind::LrZfNoClip);
                        if zf_family && s.scheme == SchemeKind::SpatialMultiplexing && a.n_r < a.n_t {
                            return Err(config_err(format!("{d} with {s} at {a} needs n_r >= n_t")));
                        }
                        if *d == DetectorKind::Ml && ml_search_size(s, a.n_t) > ML_MAX_CANDIDATES {
                            return Err(config_err(format!(
                                "ML with {s} at {a} searches {} candidates, above the limit of {ML_MAX_CANDIDATES}",
                                ml_search_size(s, a.n_t)
                            )));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn system(spec: &ExperimentSpec, a: &Antennas) -> Result<SystemConfig> {
    SystemConfig::new(a.n_t, a.n_r, spec.snr_db.clone(), spec.seed)
}

/// Runs `spec` on the current rayon pool. The table is identical for any pool size.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ResultTable> {
    validate(spec)?;
    match spec.kind {
        ExperimentKind::ErgodicRates => ergodic_rates(spec),
        ExperimentKind::Ratio => ratio(spec),
        ExperimentKind::AbsLoss => abs_loss(spec),
        ExperimentKind::CondPdf => cond_pdf(spec),
        ExperimentKind::Ber => ber(spec),
    }
}

fn capacity(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    instantaneous_capacity(h, rho)
}

fn loss(h: &ChannelMatrix, rho: f64) -> Result<f64> {
    Ok(instantaneous_capacity(h, rho)? - rate_stacked(h, rho)?)
}

fn ergodic_rates(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new("snr_db");
    let curves = all_bound_curves();
    for a in &spec.antennas {
        let cfg = system(spec, a)?;
        let quantities: [Quantity; 2] = [&capacity, &rate_stacked];
        let est = ergodic_mc_many(&cfg, spec.trials, &quantities)?;
        for (name, series) in ["c_mc", "rsa_mc"].iter().zip(&est) {
            for e in series {
                table.push(e.snr_db, format!("{name}/{a}"), e.mean, e.std_error, e.trials as u64)?;
            }
        }
        for curve in &curves {
            for &snr in &spec.snr_db {
                match curve.eval(a.n_t, a.n_r, db_to_linear(snr)) {
                    Ok(v) => table.push(snr, format!("{}/{a}", curve.name), v, 0.0, 0)?,
                    // the Jensen form is skipped where its log-space evaluation would overflow
                    Err(Error::OverflowGuard(_)) => {}
                    Err(e) => return Err(e),
                }
            }
        }
    }
    Ok(table)
}

fn ratio(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new("snr_db");
    for a in &spec.antennas {
        let cfg = system(spec, a)?;
        let quantities: [Quantity; 3] = [&capacity, &rate_stacked, &loss];
        let est = ergodic_mc_many(&cfg, spec.trials, &quantities)?;
        for k in 0..spec.snr_db.len() {
            let (c, r, d) = (est[0][k], est[1][k], est[2][k]);
            let q = c.mean / r.mean;
            // delta method; the covariance of the two means follows from the variance of their difference
            let cov = 0.5 * (c.std_error.powi(2) + r.std_error.powi(2) - d.std_error.powi(2));
            let var = (c.std_error.powi(2) - 2.0 * q * cov + q * q * r.std_error.powi(2)) / (r.mean * r.mean);
            table.push(c.snr_db, format!("ratio_mc/{a}"), q, var.max(0.0).sqrt(), c.trials as u64)?;
            let b = ratio_bounds(a.n_t, a.n_r, db_to_linear(c.snr_db))?;
            table.push(c.snr_db, format!("ratio_lb/{a}"), b.lower, 0.0, 0)?;
            table.push(c.snr_db, format!("ratio_ub/{a}"), b.upper, 0.0, 0)?;
        }
    }
    Ok(table)
}

fn abs_loss(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new("snr_db");
    for a in &spec.antennas {
        let cfg = system(spec, a)?;
        let quantities: [Quantity; 1] = [&loss];
        let est = ergodic_mc_many(&cfg, spec.trials, &quantities)?;
        for e in &est[0] {
            table.push(e.snr_db, format!("loss_mc/{a}"), e.mean, e.std_error, e.trials as u64)?;
            let b = abs_loss_bounds(a.n_t, a.n_r, db_to_linear(e.snr_db))?;
            table.push(e.snr_db, format!("loss_lb/{a}"), b.lower, 0.0, 0)?;
            table.push(e.snr_db, format!("loss_ub/{a}"), b.upper, 0.0, 0)?;
        }
    }
    Ok(table)
}

fn cond_pdf(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new("ln_cond");
    for a in &spec.antennas {
        let cfg = SystemConfig::new(a.n_t, a.n_r, Vec::new(), spec.seed)?;
        for s in &spec.schemes {
            for (with_lr, name) in [(false, "pdf"), (true, "pdf_lr")] {
                let h = cond_histogram(s.scheme, &cfg, spec.trials, with_lr, spec.bins, spec.max_ln_cond)?;
                let (n, w) = (h.trials as f64, h.bin_width());
                for (x, &d) in h.centers().iter().zip(&h.density) {
                    let p = d * w;
                    table.push(*x, format!("{name}/{a}/{}", s.scheme), d, (p * (1.0 - p) / n).sqrt() / w, h.trials as u64)?;
                }
            }
        }
    }
    Ok(table)
}

fn ber(spec: &ExperimentSpec) -> Result<ResultTable> {
    let mut table = ResultTable::new("snr_db");
    for a in &spec.antennas {
        let cfg = system(spec, a)?;
        for s in &spec.schemes {
            let link = Link { scheme: CodeScheme::new(s.scheme, a.n_t)?, constellation: Constellation::new(s.constellation) };
            let curves = simulate_ber(&link, &spec.detectors, &cfg, spec.trials, spec.blocks_per_channel)?;
            for (d, curve) in spec.detectors.iter().zip(&curves) {
                for p in curve {
                    table.push(p.snr_db, format!("ber/{a}/{s}/{d}"), p.ber, p.std_error, p.bits)?;
                }
            }
        }
    }
    Ok(table)
}
