//! How long one attribution takes, per method, on a trained model.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use lpx_bench::trained_fixture;
use lpx_core::{
    deconvolution, gnn_explainer, integrated_gradients, lrp, random_attribution,
    GnnExplainerConfig,
};

fn bench_explainers(c: &mut Criterion) {
    let (model, graph, target) = trained_fixture();

    let mut group = c.benchmark_group("explainers");
    group.sample_size(10);

    group.bench_function("integrated_gradients_32_steps", |b| {
        b.iter(|| integrated_gradients(&model, &graph, black_box(target), 32).unwrap())
    });
    group.bench_function("deconvolution", |b| {
        b.iter(|| deconvolution(&model, &graph, black_box(target)).unwrap())
    });
    group.bench_function("lrp", |b| {
        b.iter(|| lrp(&model, &graph, black_box(target), 1e-4).unwrap())
    });
    let mask_config = GnnExplainerConfig { epochs: 25, ..GnnExplainerConfig::default() };
    group.bench_function("gnn_explainer_25_epochs", |b| {
        b.iter(|| gnn_explainer(&model, &graph, black_box(target), &mask_config, 5).unwrap())
    });
    group.bench_function("random", |b| {
        b.iter(|| random_attribution(&model, &graph, black_box(target), 5).unwrap())
    });

    group.finish();
}

criterion_group!(benches, bench_explainers);
criterion_main!(benches);
