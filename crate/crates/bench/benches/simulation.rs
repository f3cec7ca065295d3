use ammsim::arbitrage::{execute_arbitrage, ArbParams};
use ammsim::harness::{sweep_with, Dispatch, Experiment, SweepSpec};
use ammsim::price::generate_path;
use ammsim::run_simulation;
use ammsim_bench::{baseline_pool, desk_config};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use std::hint::black_box;

fn swaps(c: &mut Criterion) {
    let pool = baseline_pool();
    let arb = ArbParams::default();
    c.bench_function("quote_b_for_a", |b| {
        b.iter(|| black_box(&pool).quote_b_for_a(black_box(1.2e6)))
    });
    c.bench_function("execute_arbitrage", |b| {
        b.iter(|| execute_arbitrage(black_box(&pool), black_box(2800.0), &arb))
    });
}

fn runs(c: &mut Criterion) {
    let mut group = c.benchmark_group("run_simulation");
    for n in [1_000usize, 10_000, 100_000] {
        let cfg = desk_config(n);
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(BenchmarkId::from_parameter(n), &cfg, |b, cfg| {
            b.iter(|| run_simulation(cfg).unwrap())
        });
    }
    group.finish();

    let params = desk_config(100_000).gbm_params();
    c.bench_function("generate_path/100000", |b| {
        b.iter(|| generate_path(&params, 100_000).unwrap())
    });
}

fn sweeps(c: &mut Criterion) {
    let spec = SweepSpec::new(Experiment::ArbCost, vec![0.0, 0.01, 0.02], 8, desk_config(10_000));
    let mut group = c.benchmark_group("sweep_arb_cost");
    group.sample_size(10);
    for (name, dispatch) in [("serial", Dispatch::Serial), ("parallel", Dispatch::Parallel)] {
        group.bench_function(name, |b| b.iter(|| sweep_with(&spec, dispatch).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, swaps, runs, sweeps);
criterion_main!(benches);
