use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use shuffle_sgd::verify::{default_lower_grid, lower_bound_check, trig_identity_suite, SweepSpec};
use shuffle_sgd::{herding_at_opt_strategy, run, RunConfig, ShuffleStrategy};
use shuffle_sgd_bench::{large_concave_bundle, polygon_bundle};

fn runners(c: &mut Criterion) {
    let polygon = polygon_bundle();
    let eta = polygon.spec.eta_moderate();
    let cfg = RunConfig::new(eta, polygon.spec.epochs, polygon.x0.clone());

    c.benchmark_group("polygon_epochs")
        .bench_function("igd", |b| {
            b.iter(|| run(black_box(&polygon.problem), &ShuffleStrategy::Igd, &cfg).unwrap())
        })
        .bench_function("rr", |b| {
            let rr = ShuffleStrategy::RandomReshuffle { seed: 0 };
            b.iter(|| run(black_box(&polygon.problem), &rr, &cfg).unwrap())
        })
        .bench_function("with_replacement", |b| {
            let wr = ShuffleStrategy::WithReplacement { seed: 0 };
            b.iter(|| run(black_box(&polygon.problem), &wr, &cfg).unwrap())
        });

    c.bench_function("herding_order_polygon", |b| {
        b.iter(|| herding_at_opt_strategy(black_box(&polygon.problem), None).unwrap())
    });

    let concave = large_concave_bundle();
    let sweep = SweepSpec::new(default_lower_grid(&concave, 20)).unwrap();
    c.bench_function("lower_sweep_large_concave", |b| {
        b.iter(|| {
            lower_bound_check(concave.spec.theorem, &concave.spec, black_box(&sweep)).unwrap()
        })
    });

    c.bench_function("trig_suite_to_1000", |b| {
        b.iter(|| trig_identity_suite(black_box(3..=1000)))
    });
}

criterion_group!(benches, runners);
criterion_main!(benches);
