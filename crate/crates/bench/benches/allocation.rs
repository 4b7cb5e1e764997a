use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hstn_core::rng::stream;
use hstn_core::{algorithm1, kuhn_munkres, solve_chi, solve_pair, LargeScaleState, PairContext, ScenarioConfig};
use rand::Rng;
use std::hint::black_box;

fn default_state() -> (ScenarioConfig, LargeScaleState) {
    let cfg = ScenarioConfig::default();
    let (_, ls) = LargeScaleState::sample(&cfg, &mut stream(1, 0)).unwrap();
    (cfg, ls)
}

fn rate_model(c: &mut Criterion) {
    let ctx = PairContext::new(vec![0.4, 1.3, 2.0, 0.05], 0.2, 4).unwrap();
    let p = [0.5, 0.1, 1.0, 2.0];
    c.bench_function("solve_chi/n4_m4", |b| b.iter(|| solve_chi(black_box(&ctx), black_box(&p))));
}

fn power(c: &mut Criterion) {
    let (cfg, ls) = default_state();
    let ctx = ls.pair_context(&cfg, 0, 1);
    let cons = ls.pair_constraints(&cfg, 0, 1);
    c.bench_function("solve_pair/default_scenario", |b| {
        b.iter(|| solve_pair(black_box(&ctx), black_box(&cons)).unwrap())
    });
}

fn matching(c: &mut Criterion) {
    let mut group = c.benchmark_group("kuhn_munkres");
    let mut rng = stream(2, 0);
    for k in [3usize, 8, 32, 128] {
        let w: Vec<Vec<f64>> = (0..k).map(|_| (0..k).map(|_| rng.random_range(0.0..30.0)).collect()).collect();
        group.bench_with_input(BenchmarkId::from_parameter(k), &w, |b, w| b.iter(|| kuhn_munkres(w).unwrap()));
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let (cfg, ls) = default_state();
    c.bench_function("algorithm1/default_scenario", |b| b.iter(|| algorithm1(black_box(&ls), &cfg).unwrap()));
}

criterion_group!(benches, rate_model, power, matching, pipeline);
criterion_main!(benches);
