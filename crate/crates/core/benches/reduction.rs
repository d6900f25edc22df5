use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use connmat::admissible::assemble;
use connmat::connection::{reduce, ReduceOptions};
use connmat::generate::{random_forman_field, torus_grid_for_size};
use connmat::pipeline::compute_connection_matrix;

fn reduction(c: &mut Criterion) {
    let mut group = c.benchmark_group("reduce");
    group.sample_size(20);
    for n in [200, 800, 3200] {
        let k = torus_grid_for_size(n);
        let v = random_forman_field(&mut ChaCha8Rng::seed_from_u64(n as u64), &k, 0.05);
        let out = compute_connection_matrix(&k, &v, &Default::default()).unwrap();
        let fm = assemble(&k, &out.decomposition, out.basis()).unwrap();
        group.bench_with_input(BenchmarkId::new("fast", k.len()), &fm, |b, fm| {
            b.iter(|| reduce(black_box(fm), &ReduceOptions::fast()))
        });
        group.bench_with_input(BenchmarkId::new("traced", k.len()), &fm, |b, fm| {
            b.iter(|| reduce(black_box(fm), &ReduceOptions::default()))
        });
    }
    group.finish();
}

criterion_group!(benches, reduction);
criterion_main!(benches);
