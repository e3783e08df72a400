use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use ulyap::lyapunov::ChainOptions;
use ulyap::{transfer_matrix, DisorderParam, EigenFrame, Ensemble, PhaseMeasure, TorusAngle};

fn disorder() -> DisorderParam {
    DisorderParam::new(FRAC_1_SQRT_2).unwrap()
}

fn matrices(c: &mut Criterion) {
    let d = disorder();
    let frame = EigenFrame::new(d);
    let (th, et) = (TorusAngle::new(0.3), TorusAngle::new(2.1));
    c.bench_function("transfer_matrix", |b| b.iter(|| transfer_matrix(black_box(th), black_box(et), d)));
    c.bench_function("frame_transfer", |b| b.iter(|| frame.transfer(black_box(th), black_box(et))));
}

fn chain(c: &mut Criterion) {
    let n = 100_000;
    let mut group = c.benchmark_group("chain");
    group.throughput(Throughput::Elements(n as u64));
    let cases = [
        (
            "two-atom",
            Ensemble::anderson(PhaseMeasure::bernoulli(TorusAngle::ZERO, 0.5, TorusAngle::PI).unwrap(), disorder()),
        ),
        ("uniform", Ensemble::anderson(PhaseMeasure::uniform(), disorder())),
        (
            "dimer",
            Ensemble::dimer(
                PhaseMeasure::bernoulli(TorusAngle::ZERO, 0.5, TorusAngle::new(PI / 3.0)).unwrap(),
                disorder(),
            ),
        ),
    ];
    for (name, ens) in &cases {
        group.bench_with_input(BenchmarkId::from_parameter(name), ens, |b, ens| {
            b.iter(|| {
                let mut s = ens.stream(1, 0);
                ens.run_chain(&mut s, TorusAngle::new(0.7), n, &ChainOptions::default()).unwrap().log_norm
            })
        });
    }
    group.finish();
}

fn estimate(c: &mut Criterion) {
    let ens = Ensemble::anderson(PhaseMeasure::bernoulli(TorusAngle::ZERO, 0.5, TorusAngle::PI).unwrap(), disorder());
    let mut group = c.benchmark_group("estimate");
    group.sample_size(10);
    group.bench_function("n=1e4,R=64", |b| b.iter(|| ens.estimate(TorusAngle::new(0.7), 10_000, 64, 3).unwrap().mean));
    group.finish();
}

criterion_group!(benches, matrices, chain, estimate);
criterion_main!(benches);
