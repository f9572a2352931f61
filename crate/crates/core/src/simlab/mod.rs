//! Experiment orchestration: spec files, Monte Carlo drivers and CSV output.

mod ber;
mod run;
mod spec;
mod table;
mod verify;

pub use ber::{simulate_ber, snr_at_ber, BerPoint, Link};
pub use run::{run_experiment, validate, MIN_COND_TRIALS, MIN_TRIALS};
pub use spec::{load_spec, parse_spec, Antennas, ExperimentKind, ExperimentSpec, SchemeSpec};
pub use table::{emit_csv, load_csv, ResultRow, ResultTable};
pub use verify::{verify_suite, Check};

const BUNDLED: [(&str, &str); 11] = [
    ("rsa_bounds_nt4", include_str!("../../../../experiments/rsa_bounds_nt4.spec")),
    ("rates_vs_nt", include_str!("../../../../experiments/rates_vs_nt.spec")),
    ("rates_vs_nr", include_str!("../../../../experiments/rates_vs_nr.spec")),
    ("ratio_nt8", include_str!("../../../../experiments/ratio_nt8.spec")),
    ("ratio_bounds_nt8", include_str!("../../../../experiments/ratio_bounds_nt8.spec")),
    ("abs_loss_nt6", include_str!("../../../../experiments/abs_loss_nt6.spec")),
    ("cond_sm_stacked", include_str!("../../../../experiments/cond_sm_stacked.spec")),
    ("cond_stacked_qstbc", include_str!("../../../../experiments/cond_stacked_qstbc.spec")),
    ("ber_4bps_stacked_qstbc", include_str!("../../../../experiments/ber_4bps_stacked_qstbc.spec")),
    ("ber_4bps_sm_stacked", include_str!("../../../../experiments/ber_4bps_sm_stacked.spec")),
    ("ber_8bps_sm_stacked", include_str!("../../../../experiments/ber_8bps_sm_stacked.spec")),
];

/// The experiment specs shipped in `experiments/`, as `(name, text)`.
pub fn bundled_experiments() -> Vec<(&'static str, &'static str)> {
    BUNDLED.to_vec()
}

/// Looks a bundled experiment up by name.
pub fn bundled_experiment(name: &str) -> Option<&'static str> {
    BUNDLED.iter().find(|(n, _)| *n == name).map(|&(_, t)| t)
}
