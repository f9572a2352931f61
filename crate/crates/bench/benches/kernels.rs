use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use stcsim_bench::{channels, receive_vectors};
use stcsim_core::channel::{Constellation, ConstellationKind, SystemConfig};
use stcsim_core::detect::{lll_reduce, BlockDetector, DetectorKind, DEFAULT_DELTA};
use stcsim_core::inforate::{ergodic_mc, instantaneous_capacity, rate_stacked};
use stcsim_core::stcodes::{realify, CodeScheme, SchemeKind};

fn lll(c: &mut Criterion) {
    let mut group = c.benchmark_group("lll");
    for n in [4, 8] {
        let bases: Vec<_> = channels(n, n, 64).iter().map(|h| realify(h.matrix())).collect();
        group.bench_with_input(BenchmarkId::from_parameter(2 * n), &bases, |b, bases| {
            let mut k = 0;
            b.iter(|| {
                k = (k + 1) % bases.len();
                lll_reduce(&bases[k], DEFAULT_DELTA).unwrap()
            })
        });
    }
    group.finish();
}

fn detectors(c: &mut Criterion) {
    let mut group = c.benchmark_group("detect_4x4");
    let hs = channels(4, 4, 16);
    let cases = [
        (SchemeKind::StackedOstbc, ConstellationKind::Qam16),
        (SchemeKind::Qstbc4, ConstellationKind::Qam16),
        (SchemeKind::SpatialMultiplexing, ConstellationKind::Qam4),
    ];
    for (scheme, ck) in cases {
        let code = CodeScheme::new(scheme, 4).unwrap();
        let con = Constellation::new(ck);
        let rows = code.equivalent_channel(&hs[0]).unwrap().complex.rows();
        let ys = receive_vectors(rows, 64);
        for kind in [DetectorKind::Ml, DetectorKind::LrZf] {
            let dets: Vec<_> = hs.iter().map(|h| BlockDetector::new(&code, h, &con, kind).unwrap()).collect();
            group.bench_function(format!("{scheme}_{ck}_{kind}"), |b| {
                let mut k = 0;
                b.iter(|| {
                    k += 1;
                    dets[k % dets.len()].detect(&ys[k % ys.len()]).unwrap()
                })
            });
        }
    }
    group.finish();
}

fn logdet(c: &mut Criterion) {
    let hs = channels(4, 8, 64);
    c.bench_function("capacity_8x4", |b| {
        let mut k = 0;
        b.iter(|| {
            k = (k + 1) % hs.len();
            instantaneous_capacity(&hs[k], 100.0).unwrap()
        })
    });
    c.bench_function("stacked_rate_8x4", |b| {
        let mut k = 0;
        b.iter(|| {
            k = (k + 1) % hs.len();
            rate_stacked(&hs[k], 100.0).unwrap()
        })
    });
}

fn ergodic(c: &mut Criterion) {
    let cfg = SystemConfig::new(4, 2, vec![0.0, 10.0, 20.0, 30.0], 1).unwrap();
    let mut group = c.benchmark_group("ergodic_mc");
    group.sample_size(10);
    group.bench_function("4x2_1000_trials", |b| b.iter(|| ergodic_mc(&cfg, 1000, rate_stacked).unwrap()));
    group.finish();
}

criterion_group!(benches, lll, detectors, logdet, ergodic);
criterion_main!(benches);
