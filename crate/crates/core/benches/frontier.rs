use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tradeoff_core::classifier::{classify, predict_scores, TrainConfig};
use tradeoff_core::dataset::{Attribute, FeatureMatrix, Group};
use tradeoff_core::frontier::{generate_candidates, weight_grid, GridConfig};
use tradeoff_core::metrics::{group_confusion, ThresholdGrid};
use tradeoff_core::parallel::{ordered_map, Schedule};

/// Roughly the shape of the race training split: 2100 rows, 9 features.
fn synthetic_matrix(n: usize, seed: u64) -> FeatureMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 9;
    let mut raw = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for i in 0..n {
        let row: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let group = if i % 2 == 0 { Group::A0 } else { Group::A1 };
        let z = row[0] - 0.5 * row[1] + 0.3 * row[2] + if group == Group::A1 { 0.4 } else { 0.0 };
        labels.push(z + rng.random_range(-1.0..1.0) > 0.0);
        groups.push(group);
        raw.push(row);
    }
    let names = (0..dim).map(|j| format!("x{j}")).collect();
    let fit_rows: Vec<usize> = (0..n).collect();
    FeatureMatrix::from_raw(raw, labels, groups, names, dim, &fit_rows).unwrap()
}

fn schedules() -> Vec<(&'static str, Schedule)> {
    vec![
        ("sequential", Schedule::Sequential),
        #[cfg(feature = "parallel")]
        ("parallel", Schedule::Parallel),
    ]
}

fn candidates(c: &mut Criterion) {
    let matrix = synthetic_matrix(2100, 1);
    let config = TrainConfig::default();
    let mut group = c.benchmark_group("generate_candidates");
    group.sample_size(10);
    for levels in [3, 5] {
        let grid = weight_grid(&GridConfig { levels, range: 4.0 }).unwrap();
        for (name, schedule) in schedules() {
            group.bench_with_input(BenchmarkId::new(name, grid.len()), &grid, |b, grid| {
                b.iter(|| generate_candidates(black_box(&matrix), grid, &config, schedule))
            });
        }
    }
    group.finish();
}

fn evaluation(c: &mut Criterion) {
    let matrix = synthetic_matrix(3000, 2);
    let grid = weight_grid(&GridConfig { levels: 5, range: 4.0 }).unwrap();
    let set = generate_candidates(&matrix, &grid, &TrainConfig::default(), Schedule::Sequential);
    let thresholds = ThresholdGrid::default();
    let mut group = c.benchmark_group("evaluate_family");
    for (name, schedule) in schedules() {
        group.bench_function(name, |b| {
            b.iter(|| {
                ordered_map(&set.candidates, schedule, |_, cand| {
                    let scores = predict_scores(&cand.model, &matrix.raw).unwrap();
                    thresholds
                        .values()
                        .iter()
                        .map(|&t| {
                            group_confusion(&classify(&scores, t), &matrix.labels, &matrix.groups, Attribute::Race)
                                .unwrap()
                        })
                        .collect::<Vec<_>>()
                })
            })
        });
    }
    group.finish();
}

criterion_group!(benches, candidates, evaluation);
criterion_main!(benches);
