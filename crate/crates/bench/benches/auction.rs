use std::hint::black_box;

use bmcm_core::graph::{generate_bnp, GraphGenSpec};
use bmcm_core::parallel::run_parallel;
use bmcm_core::verify::hopcroft_karp;
use bmcm_core::{auction, BipartiteGraph, ParallelConfig};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn sparse_instance(n: usize) -> BipartiteGraph {
    let nf = n as f64;
    let p = 3.0 * nf.ln() / nf;
    generate_bnp(&GraphGenSpec::new(n, p, 1).unwrap())
}

fn bench_sequential(c: &mut Criterion) {
    let mut group = c.benchmark_group("auction_run");
    for n in [256, 1024, 4096] {
        let g = sparse_instance(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| auction::run(black_box(g)))
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("hopcroft_karp");
    for n in [256, 1024, 4096] {
        let g = sparse_instance(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &g, |b, g| {
            b.iter(|| hopcroft_karp(black_box(g)))
        });
    }
    group.finish();
}

fn bench_parallel(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_parallel_dense");
    group.sample_size(10);
    let g = generate_bnp(&GraphGenSpec::new(2048, 0.5, 7).unwrap());
    for q in [1, 2, 4] {
        let cfg = ParallelConfig::new(q).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(q), &cfg, |b, cfg| {
            b.iter(|| run_parallel(black_box(&g), cfg))
        });
    }
    group.finish();
}

fn bench_generate(c: &mut Criterion) {
    c.bench_function("generate_bnp_1024", |b| {
        let spec = GraphGenSpec::new(1024, 0.02, 3).unwrap();
        b.iter(|| generate_bnp(black_box(&spec)))
    });
}

criterion_group!(benches, bench_sequential, bench_oracle, bench_parallel, bench_generate);
criterion_main!(benches);
