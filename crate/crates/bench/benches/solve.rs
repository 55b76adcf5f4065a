use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cquant::solver::{solve, SolverConfig};
use cquant_bench::families;

fn bench_solve(c: &mut Criterion) {
    let cfg = SolverConfig {
        starts: 4,
        ..Default::default()
    };
    let mut group = c.benchmark_group("solve");
    group.sample_size(10);
    for (name, fam) in families() {
        let measure = fam.measure();
        let constraint = fam.constraint();
        for n in [4, 8, 16] {
            group.bench_with_input(BenchmarkId::new(name, n), &n, |b, &n| {
                b.iter(|| solve(black_box(&measure), &constraint, fam.window(), n, &cfg).expect("solve"))
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_solve);
criterion_main!(benches);
