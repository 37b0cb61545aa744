//! Parallel against sequential evaluation of the randomized suites.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use localk::algebra::LocalizedAlgebra;
use localk::identities::run_identity_suite;
use localk::kclasses::run_exactness_suite;
use localk::mayer_vietoris::{propagation_cover, quotient_diagram};
use localk::par::Execution;
use localk::scalars::Poly;

const MODES: [(&str, Execution); 2] = [("parallel", Execution::Parallel), ("sequential", Execution::Sequential)];

fn identities(c: &mut Criterion) {
    let quotient = LocalizedAlgebra::quotient(Poly::from_ints(&[-1, 0, 1]), 8, 16).expect("monic modulus");
    let mut group = c.benchmark_group("identity_suite");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, "quotient"), &exec, |b, &exec| {
            b.iter(|| black_box(run_identity_suite(&quotient, 4, 50, 1, exec)))
        });
    }
    group.finish();
}

fn exactness(c: &mut Criterion) {
    let mut group = c.benchmark_group("exactness_suite");
    group.sample_size(10);
    for (label, d) in [("quotient", quotient_diagram(8, 16)), ("cover", propagation_cover(16))] {
        for (name, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, label), &exec, |b, &exec| {
                b.iter(|| black_box(run_exactness_suite(&d, 2, 10, 1, exec)))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, identities, exactness);
criterion_main!(benches);
