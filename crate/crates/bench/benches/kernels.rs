//! Criterion microbenchmarks for the hot kernels and the full pipeline.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use ylie_bench::seeded_tensor;
use ylie_core::spectral::fft2_polar_packed;
use ylie_core::tensor::{conv2d, Conv2dSpec};
use ylie_core::{Model, ModelConfig};

fn bench_conv2d(c: &mut Criterion) {
    let x = seeded_tensor([1, 32, 64, 64], 1);
    let w = seeded_tensor([32, 32, 3, 3], 2);
    c.bench_function("conv2d 32x64x64 3x3", |b| {
        b.iter(|| {
            black_box(conv2d(
                black_box(&x),
                black_box(&w),
                None,
                Conv2dSpec { pad: (1, 1), ..Conv2dSpec::default() },
            ))
        })
    });
}

fn bench_fft2(c: &mut Criterion) {
    let x = seeded_tensor([1, 8, 256, 256], 3);
    c.bench_function("fft2 polar 8x256x256", |b| {
        b.iter(|| black_box(fft2_polar_packed(black_box(&x))))
    });
}

fn bench_pipeline(c: &mut Criterion) {
    let model = Model::new(ModelConfig::default()).expect("default config is valid");
    let x = seeded_tensor([1, 3, 256, 256], 4);
    c.bench_function("pipeline forward 256x256", |b| {
        b.iter(|| black_box(model.forward(black_box(&x))))
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = bench_conv2d, bench_fft2, bench_pipeline
}
criterion_main!(benches);
