//! Seeded stratified fold assignment shared by the classifier's internal
//! bandwidth search and the evaluation engine.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Assigns each sample to one of `k` folds.
///
/// Samples are shuffled with `seed`, then dealt round-robin within each
/// class (classes in ascending label order). Each class's dealing starts
/// where the previous class stopped, so fold sizes also stay within one of
/// each other. Per class, fold counts differ by at most one.
pub fn stratified_folds(labels: &[usize], k: usize, seed: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut classes: Vec<usize> = labels.to_vec();
    classes.sort_unstable();
    classes.dedup();
    let mut fold = vec![0; labels.len()];
    let mut next = 0;
    for c in classes {
        for &i in order.iter().filter(|&&i| labels[i] == c) {
            fold[i] = next % k;
            next += 1;
        }
    }
    fold
}

/// Splits sample positions into `(train, test)` for fold `f`.
pub fn split(folds: &[usize], f: usize) -> (Vec<usize>, Vec<usize>) {
    (0..folds.len()).partition(|&i| folds[i] != f)
}

/// Smallest per-class count among the labels present.
pub fn min_class_count(labels: &[usize]) -> usize {
    let mut counts = std::collections::BTreeMap::new();
    for &l in labels {
        *counts.entry(l).or_insert(0usize) += 1;
    }
    counts.values().copied().min().unwrap_or(0)
}
