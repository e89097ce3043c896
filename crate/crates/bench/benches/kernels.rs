use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphblock::engine::{
    evolve_operator, evolve_state, initial_operator, realization_rng, run_ensemble, sample_layer,
};
use graphblock::gf2::BitMatrix;
use graphblock::lc::{enumerate_lc_classes, lc_orbit};
use graphblock::{GraphSpec, Region};
use graphblock_bench::{ring_config, scrambled_state};
use rand::{Rng, SeedableRng};
use std::hint::black_box;

fn rank(c: &mut Criterion) {
    let mut group = c.benchmark_group("gf2_rank");
    for n in [64, 200, 512] {
        let mut rng = rand::rngs::StdRng::seed_from_u64(n as u64);
        let mut m = BitMatrix::zeros(n, n);
        for r in 0..n {
            for col in 0..n {
                m.set(r, col, rng.random_bool(0.5));
            }
        }
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| b.iter(|| black_box(m.clone().rank())));
    }
    group.finish();
}

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("half_chain_entropy");
    for n in [100, 200, 400] {
        let cfg = ring_config(n);
        let state = scrambled_state(&cfg, n);
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| black_box(state.entropy_bits(Region::half_chain(n)).unwrap()))
        });
    }
    group.finish();
}

fn layers(c: &mut Criterion) {
    let cfg = ring_config(200);
    c.bench_function("layer_state_and_operator_n200", |b| {
        let mut rng = realization_rng(1, 0);
        let mut state = scrambled_state(&cfg, 0);
        let mut w = initial_operator(&cfg).unwrap();
        b.iter(|| {
            let layer = sample_layer(&cfg, &mut rng).unwrap();
            evolve_state(&cfg, &mut state, &layer).unwrap();
            evolve_operator(&cfg, &mut w, &layer).unwrap();
        })
    });
    let mut small = ring_config(100);
    small.layers = Some(100);
    small.realizations = 8;
    c.bench_function("ensemble_n100_t100_r8", |b| b.iter(|| black_box(run_ensemble(&small).unwrap())));
}

fn lc(c: &mut Criterion) {
    c.bench_function("lc_orbit_ring6", |b| {
        let g = GraphSpec::ring(6).unwrap();
        b.iter(|| black_box(lc_orbit(&g, 1_000_000).unwrap().len()))
    });
    let mut group = c.benchmark_group("lc_classes");
    group.sample_size(10);
    for n in [5, 6] {
        group.bench_function(BenchmarkId::from_parameter(n), |b| {
            b.iter(|| black_box(enumerate_lc_classes(n).unwrap().len()))
        });
    }
    group.finish();
}

criterion_group!(benches, rank, entropy, layers, lc);
criterion_main!(benches);
