//! DTW benchmarks: banded cost-grid fill plus backtracking.
//!
//! The headline case is the one the evaluation pipeline runs in its inner
//! loop: a causal band of width 6 over a 1000-point hourly segment. `--save-
//! baseline` / `--baseline` make regressions visible across changes.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

use dstlab_core::dtw::{backtrack, cumulative_grid, WindowConstraint};

fn random_walk(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = 0.0f64;
    (0..n)
        .map(|_| {
            x += rng.gen_range(-1.0..1.0);
            x
        })
        .collect()
}

fn bench_causal_band(c: &mut Criterion) {
    let mut group = c.benchmark_group("causal_band");
    for &n in &[1000usize, 10_000] {
        let query = random_walk(n, 11);
        let subject = random_walk(n, 12);
        group.bench_with_input(BenchmarkId::new("w6", n), &n, |b, _| {
            b.iter(|| {
                let grid =
                    cumulative_grid(black_box(&query), black_box(&subject), WindowConstraint::Causal(6))
                        .unwrap();
                backtrack(&grid).len()
            })
        });
    }
    group.finish();
}

fn bench_window_widths(c: &mut Criterion) {
    let mut group = c.benchmark_group("window_width");
    let n = 1000usize;
    let query = random_walk(n, 21);
    let subject = random_walk(n, 22);
    for &w in &[1usize, 6, 24, 72] {
        group.bench_with_input(BenchmarkId::from_parameter(w), &w, |b, &w| {
            b.iter(|| {
                let grid = cumulative_grid(
                    black_box(&query),
                    black_box(&subject),
                    WindowConstraint::Symmetric(w),
                )
                .unwrap();
                grid.final_cost()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_causal_band, bench_window_widths);
criterion_main!(benches);
