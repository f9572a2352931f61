use proptest::prelude::*;
use stcsim_core::channel::{Constellation, ConstellationKind};
use stcsim_core::detect::{lll_reduce, DetectorKind};
use stcsim_core::numerics::{Complex64, ComplexMatrix, RealMatrix};
use stcsim_core::simlab::{parse_spec, Antennas, ExperimentKind, ExperimentSpec, ResultTable};
use stcsim_core::stcodes::{complexify_vec, realify, realify_vec};

fn real_matrix(n: usize) -> impl Strategy<Value = RealMatrix> {
    prop::collection::vec(-10.0f64..10.0, n * n).prop_map(move |v| RealMatrix::new(n, n, v).unwrap())
}

fn complex_matrix(r: usize, c: usize) -> impl Strategy<Value = ComplexMatrix> {
    prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), r * c)
        .prop_map(move |v| ComplexMatrix::new(r, c, v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap())
}

fn constellation() -> impl Strategy<Value = Constellation> {
    prop_oneof![Just(ConstellationKind::Bpsk), Just(ConstellationKind::Qam4), Just(ConstellationKind::Qam16)]
        .prop_map(Constellation::new)
}

proptest! {
    #[test]
    fn lll_output_is_reduced_and_equivalent(b in (2usize..7).prop_flat_map(real_matrix), delta in 0.3f64..1.0) {
        if let Ok(lr) = lll_reduce(&b, delta) {
            prop_assert_eq!(lr.check(&b, 1e-8), Ok(()));
        }
    }

    #[test]
    fn lll_is_idempotent_up_to_rounding(b in real_matrix(4)) {
        if let Ok(first) = lll_reduce(&b, 0.75) {
            let again = lll_reduce(&first.q, 0.75).unwrap();
            prop_assert!(again.check(&first.q, 1e-8).is_ok());
        }
    }

    #[test]
    fn realify_is_multiplicative(a in complex_matrix(3, 2), b in complex_matrix(2, 4)) {
        let lhs = realify(&a.matmul(&b).unwrap());
        let rhs = realify(&a).matmul(&realify(&b)).unwrap();
        prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn realify_vec_round_trips(v in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 0..9)) {
        let z: Vec<Complex64> = v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect();
        prop_assert_eq!(complexify_vec(&realify_vec(&z)), z);
    }

    #[test]
    fn bits_survive_mapping(c in constellation(), seed in prop::collection::vec(0u8..2, 48)) {
        let symbols = c.map_bits(&seed).unwrap();
        prop_assert_eq!(c.demap_symbols(&symbols), seed);
    }

    #[test]
    fn spec_text_round_trips(
        kind in prop_oneof![Just(ExperimentKind::Ber), Just(ExperimentKind::Ratio), Just(ExperimentKind::CondPdf)],
        ants in prop::collection::vec((1usize..9, 1usize..9), 1..4),
        snr in prop::collection::vec(-20.0f64..60.0, 1..6),
        seed in any::<u64>(),
        trials in 0usize..100_000,
        detectors in prop::collection::vec(prop_oneof![Just(DetectorKind::Ml), Just(DetectorKind::LrZf), Just(DetectorKind::Zf)], 0..3),
    ) {
        let mut spec = ExperimentSpec::new("prop", kind, ants.into_iter().map(|(n_t, n_r)| Antennas { n_t, n_r }).collect());
        spec.snr_db = snr;
        spec.seed = seed;
        spec.trials = trials;
        spec.detectors = detectors;
        prop_assert_eq!(parse_spec(&spec.to_spec_string()).unwrap(), spec);
    }

    #[test]
    fn csv_round_trips(cells in prop::collection::vec((-50.0f64..50.0, any::<f64>(), 0.0f64..1.0, any::<u32>()), 1..30)) {
        let mut t = ResultTable::new("snr_db");
        for (k, (x, v, se, n)) in cells.iter().enumerate() {
            if v.is_finite() {
                t.push(*x, format!("m{}", k % 3), *v, *se, *n as u64).unwrap();
            }
        }
        let back = ResultTable::read_csv(t.to_csv_string().as_bytes()).unwrap();
        prop_assert_eq!(back.rows(), t.rows());
    }
}
