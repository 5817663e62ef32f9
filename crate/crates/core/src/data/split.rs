//! Seeded train/validation/test splits.
//!
//! The permutation is a Fisher–Yates shuffle driven by ChaCha20 seeded from
//! the `u64` seed (stream 2), with bounded draws from `rand`'s portable
//! integer range sampler, so indices are identical on every platform.

use rand::Rng;
use rand_chacha::ChaCha20Rng;

use super::Dataset;
use crate::error::{invalid, Result};
use crate::model::Task;
use crate::rff::seeded_rng;

const SPLIT_STREAM: u64 = 2;

fn shuffle(idx: &mut [usize], rng: &mut ChaCha20Rng) {
    for i in (1..idx.len()).rev() {
        let j = rng.random_range(0..=i);
        idx.swap(i, j);
    }
}

fn part_sizes(n: usize, f: [f64; 3]) -> [usize; 3] {
    let train = ((f[0] * n as f64).round() as usize).min(n);
    let val = ((f[1] * n as f64).round() as usize).min(n - train);
    [train, val, n - train - val]
}

/// Index sets for `(train, val, test)`.
///
/// Sizes are `round(f₀·n)`, `round(f₁·n)` and the remainder. With `labels`
/// the split is stratified: each class is permuted and sliced on its own,
/// then every part is shuffled.
pub fn split_indices(
    n: usize,
    labels: Option<&[f64]>,
    fractions: [f64; 3],
    seed: u64,
) -> Result<[Vec<usize>; 3]> {
    if fractions.iter().any(|f| !(*f > 0.0 && f.is_finite())) {
        return Err(invalid(format!("split fractions must be positive, got {fractions:?}")));
    }
    let total: f64 = fractions.iter().sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(invalid(format!("split fractions must sum to 1, got {total}")));
    }
    let mut rng = seeded_rng(seed, SPLIT_STREAM);
    let mut parts: [Vec<usize>; 3] = Default::default();
    let groups: Vec<Vec<usize>> = match labels {
        None => vec![(0..n).collect()],
        Some(y) => {
            if y.len() != n {
                return Err(invalid("label count differs from n"));
            }
            [0.0, 1.0]
                .iter()
                .map(|&c| (0..n).filter(|&i| y[i] == c).collect())
                .collect()
        }
    };
    for mut g in groups {
        shuffle(&mut g, &mut rng);
        let [a, b, _] = part_sizes(g.len(), fractions);
        parts[0].extend_from_slice(&g[..a]);
        parts[1].extend_from_slice(&g[a..a + b]);
        parts[2].extend_from_slice(&g[a + b..]);
    }
    if labels.is_some() {
        for p in parts.iter_mut() {
            shuffle(p, &mut rng);
        }
    }
    if let Some(k) = parts.iter().position(Vec::is_empty) {
        let name = ["train", "validation", "test"][k];
        return Err(invalid(format!("{name} split is empty (n = {n}, fractions {fractions:?})")));
    }
    Ok(parts)
}

/// Splits a data set; classification is stratified by label.
pub fn split(dataset: &Dataset, fractions: [f64; 3], seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    let labels = (dataset.task == Task::BinaryClassification).then_some(dataset.y.as_slice());
    let [a, b, c] = split_indices(dataset.n_rows(), labels, fractions, seed)?;
    Ok((dataset.subset(&a), dataset.subset(&b), dataset.subset(&c)))
}
