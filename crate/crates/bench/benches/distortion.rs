use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cquant::distortion::{build_partition, distortion_value, gradient};
use cquant_bench::{families, spread_codebook};

fn bench_distortion(c: &mut Criterion) {
    let mut group = c.benchmark_group("distortion");
    for (name, fam) in families() {
        let measure = fam.measure();
        for n in [4, 16, 64, 256] {
            let cb = spread_codebook(&fam, n);
            group.bench_with_input(BenchmarkId::new(name, n), &cb, |b, cb| {
                b.iter(|| distortion_value(black_box(&measure), black_box(cb)))
            });
        }
    }
    group.finish();
}

fn bench_gradient(c: &mut Criterion) {
    let mut group = c.benchmark_group("gradient");
    for (name, fam) in families() {
        let measure = fam.measure();
        for n in [16, 256] {
            let cb = spread_codebook(&fam, n);
            group.bench_with_input(BenchmarkId::new(name, n), &cb, |b, cb| {
                b.iter(|| {
                    let part = build_partition(black_box(&measure), black_box(cb));
                    gradient(&measure, cb, &part)
                })
            });
        }
    }
    group.finish();
}

criterion_group!(benches, bench_distortion, bench_gradient);
criterion_main!(benches);
