use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use subdyn_core::invariant::{cesaro_cluster, inv_leq};
use subdyn_core::measure::Submeasure;
use subdyn_core::models;
use subdyn_core::sampling;
use subdyn_core::transfer::{pushforward, pushforward_value};

fn bench_pushforward(c: &mut Criterion) {
    let mut group = c.benchmark_group("pushforward");
    for &n in &[6usize, 10, 14] {
        let mut rng = sampling::rng(3);
        let space = sampling::random_space(&mut rng, n);
        let f = sampling::random_multimap(&mut rng, &space, 2, 3);
        let mu = sampling::random_submeasure(&mut rng, n, 3, 1.0);
        let phi = sampling::random_ground(&mut rng, n, -1.0, 1.0);
        group.bench_with_input(
            BenchmarkId::new("materialize", n),
            &(f.clone(), mu.clone()),
            |b, (f, mu)| b.iter(|| pushforward(black_box(f), black_box(mu))),
        );
        group.bench_with_input(
            BenchmarkId::new("lazy_evaluate", n),
            &(f, mu, phi),
            |b, (f, mu, phi)| {
                b.iter(|| pushforward_value(black_box(f), black_box(mu), black_box(phi)))
            },
        );
    }
    group.finish();
}

fn bench_invariant(c: &mut Criterion) {
    let mut group = c.benchmark_group("invariant");
    group.sample_size(20);
    let m = models::picard(8);
    let n = m.space.len();
    group.bench_function("cesaro_cluster_picard8", |b| {
        let seed = Submeasure::dirac(n, 0);
        b.iter(|| cesaro_cluster(black_box(&m.map), black_box(&seed), 512, 128))
    });
    group.bench_function("inv_leq_from_top_picard8", |b| {
        let top = Submeasure::top(n);
        b.iter(|| inv_leq(black_box(&m.map), black_box(&top), 1e-9, 10_000))
    });
    group.finish();
}

criterion_group!(benches, bench_pushforward, bench_invariant);
criterion_main!(benches);
