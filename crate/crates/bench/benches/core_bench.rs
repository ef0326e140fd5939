use std::hint::black_box;

use baltor_core::{
    abstain::{calibrate_threshold, conditional_risk},
    data::{format_letor, parse_letor, synth_generate, SynthConfig},
    oracle::{brute_force_optimum, random_world, theorem_selector, LossKind},
    probmodel::{bt_probs, tm_probs},
};
use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

fn bench_prob_models(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(1);
    let pairs: Vec<(f64, f64)> = (0..10_000)
        .map(|_| (rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0)))
        .collect();
    c.bench_function("bt_probs_10k", |b| {
        b.iter(|| {
            for &(s, sp) in &pairs {
                black_box(bt_probs(s, sp, 1.9).unwrap());
            }
        })
    });
    c.bench_function("tm_probs_10k", |b| {
        b.iter(|| {
            for &(s, sp) in &pairs {
                black_box(tm_probs(s, sp, 0.65).unwrap());
            }
        })
    });
}

fn bench_calibration(c: &mut Criterion) {
    let mut rng = ChaCha12Rng::seed_from_u64(2);
    let risks: Vec<f64> = (0..100_000)
        .map(|_| {
            conditional_risk(
                bt_probs(
                    rng.random_range(-3.0..3.0),
                    rng.random_range(-3.0..3.0),
                    1.9,
                )
                .unwrap(),
            )
        })
        .collect();
    c.bench_function("calibrate_threshold_100k", |b| {
        b.iter(|| black_box(calibrate_threshold(&risks, 0.85).unwrap()))
    });
}

fn bench_oracle(c: &mut Criterion) {
    let world = random_world(3, 7, LossKind::ZeroOne);
    c.bench_function("theorem_selector_m3", |b| {
        b.iter(|| black_box(theorem_selector(&world, 0.7)))
    });
    c.bench_function("brute_force_m3_k20", |b| {
        b.iter(|| black_box(brute_force_optimum(&world, 0.7, 20).unwrap()))
    });
}

fn bench_parser(c: &mut Criterion) {
    let (dataset, _) = synth_generate(&SynthConfig {
        n_queries: 100,
        items_per_query: 20,
        feature_dim: 16,
        n_grades: 3,
        noise_sd: 0.3,
        seed: 3,
    })
    .unwrap();
    let text = format_letor(&dataset);
    c.bench_function("parse_letor_2k_rows", |b| {
        b.iter(|| black_box(parse_letor(&text).unwrap()))
    });
}

criterion_group!(
    benches,
    bench_prob_models,
    bench_calibration,
    bench_oracle,
    bench_parser
);
criterion_main!(benches);
