use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use zeno_dd_bench::reference_ensemble;
use zeno_dd_core::model::projector_d;
use zeno_dd_core::montecarlo::{estimate, sample_trajectory, statistic};
use zeno_dd_core::protocol::{average_evolution_exact, brute_force_average, zeno_error, TerminalPulse, ZenoVariant};

fn trajectories(c: &mut Criterion) {
    let e = reference_ensemble();
    let mut group = c.benchmark_group("trajectory_evolution");
    for n in [10, 100, 1000] {
        let ctx = e.context(n).unwrap();
        let s = sample_trajectory(&e.set, n, 1, 0);
        group.bench_with_input(BenchmarkId::from_parameter(n), &s, |b, s| b.iter(|| ctx.evolution(black_box(s))));
    }
    group.finish();
}

fn averages(c: &mut Criterion) {
    let e = reference_ensemble();
    c.bench_function("average_exact_n100", |b| {
        b.iter(|| average_evolution_exact(&e.model, black_box(100), TerminalPulse::Applied))
    });
    c.bench_function("brute_force_average_n3", |b| b.iter(|| brute_force_average(&e.model, &e.set, black_box(3))));
    let h = e.model.generator();
    let d = projector_d(2, 2);
    c.bench_function("zeno_error_n100", |b| {
        b.iter(|| zeno_error(h.matrix(), d.matrix(), e.model.t_total, black_box(100), ZenoVariant::PLast))
    });
}

fn estimates(c: &mut Criterion) {
    let e = reference_ensemble();
    let mut group = c.benchmark_group("estimate_100_samples_n50");
    group.sample_size(20);
    for name in ["purity-1", "frob-dist-2-zeno", "diamond-upper-1-closest-unitary"] {
        let stat = statistic(name).unwrap();
        group.bench_function(name, |b| b.iter(|| estimate(&e, 50, 100, black_box(7), stat)));
    }
    group.finish();
}

criterion_group!(benches, trajectories, averages, estimates);
criterion_main!(benches);
