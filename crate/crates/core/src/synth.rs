//! Deterministic synthetic instance generators for tests and benchmarks.

use crate::data::Dataset;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Dense instance with features uniform on `[-1, 1]` and labels produced
/// by a planted hyperplane, flipped with probability `flip_prob`.
pub fn planted_instance(n: usize, p: usize, flip_prob: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w_true: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let x: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().all(|v| *v == 0.0) {
            continue;
        }
        let score: f64 = x.iter().zip(&w_true).map(|(a, b)| a * b).sum();
        let mut label = if score >= 0.0 { 1.0 } else { -1.0 };
        if rng.gen_bool(flip_prob) {
            label = -label;
        }
        rows.push((x, label));
    }
    Dataset::from_samples(&rows).expect("generated rows are valid")
}

/// Dense instance with uniform features and independently random labels.
pub fn random_labels_instance(n: usize, p: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    while rows.len() < n {
        let x: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
        if x.iter().all(|v| *v == 0.0) {
            continue;
        }
        let label = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        rows.push((x, label));
    }
    Dataset::from_samples(&rows).expect("generated rows are valid")
}

/// Census-style stand-in: sparse binary features, imbalanced classes with
/// the majority near the requested fraction, and moderate label noise so a
/// linear separator clearly beats majority vote.
///
/// Returns `(train, test)` with the requested sizes and a shared feature
/// dimension `p`.
pub fn census_like(
    n_train: usize,
    n_test: usize,
    p: usize,
    majority_fraction: f64,
    seed: u64,
) -> (Dataset, Dataset) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_train + n_test;
    let activation: Vec<f64> = (0..p).map(|_| rng.gen_range(0.02..0.25)).collect();
    let w_true: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();

    let mut feature_rows: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut scores: Vec<f64> = Vec::with_capacity(n);
    while feature_rows.len() < n {
        let x: Vec<f64> = activation
            .iter()
            .map(|&q| if rng.gen_bool(q) { 1.0 } else { 0.0 })
            .collect();
        if x.iter().all(|v| *v == 0.0) {
            continue;
        }
        let score: f64 = x.iter().zip(&w_true).map(|(a, b)| a * b).sum();
        scores.push(score);
        feature_rows.push(x);
    }

    // Threshold at the majority quantile so the negative class holds the
    // requested share before noise.
    let mut sorted = scores.clone();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cut = ((n as f64 * majority_fraction) as usize).min(n - 1);
    let threshold = sorted[cut];

    let mut rows: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n);
    for (x, score) in feature_rows.into_iter().zip(scores) {
        let mut label = if score > threshold { 1.0 } else { -1.0 };
        if rng.gen_bool(0.06) {
            label = -label;
        }
        rows.push((x, label));
    }

    let test_rows = rows.split_off(n_train);
    let train = Dataset::from_samples(&rows).expect("train rows valid");
    let test = Dataset::from_samples(&test_rows).expect("test rows valid");
    (train, test)
}
