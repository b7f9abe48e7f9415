//! Seeded synthetic datasets with the shapes of common LibSVM benchmarks.
//!
//! The generators return raw (un-normalized) labels so that callers go
//! through [`normalize_labels`](super::normalize_labels) exactly as with a
//! file on disk.

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Dataset, SparseRow};

pub const BREAST_CANCER_N: usize = 683;
pub const BREAST_CANCER_D: usize = 10;
pub const MUSHROOMS_N: usize = 8124;
pub const MUSHROOMS_D: usize = 112;

/// 683 samples, 10 features in `[-1, 1]`, labels `{2, 4}` (444 / 239).
///
/// Feature 1 is an uninformative record-id column; features 2..=10 are
/// ordinal levels 1..=10 rescaled to `[-1, 1]`, low for class 2 and spread
/// towards high values for class 4, with overlap.
pub fn breast_cancer_like(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let benign = WeightedIndex::new((0..10).map(|v| 0.45f64.powi(v))).unwrap();
    let malignant = WeightedIndex::new((0..10).map(|v| 1.15f64.powi(v))).unwrap();

    let mut labels: Vec<f64> = std::iter::repeat(2.0)
        .take(444)
        .chain(std::iter::repeat(4.0).take(BREAST_CANCER_N - 444))
        .collect();
    labels.shuffle(&mut rng);

    let rows = labels
        .iter()
        .map(|&y| {
            let mut dense = [0.0; BREAST_CANCER_D];
            dense[0] = rng.gen_range(-1.0..=1.0);
            for v in dense.iter_mut().skip(1) {
                let level = if y == 2.0 {
                    benign.sample(&mut rng)
                } else {
                    malignant.sample(&mut rng)
                };
                *v = level as f64 / 9.0 * 2.0 - 1.0;
            }
            SparseRow::from_dense(&dense).unwrap()
        })
        .collect();
    Dataset::new(rows, labels, BREAST_CANCER_D).unwrap()
}

const MUSHROOM_CARDINALITIES: [usize; 22] = [
    6, 4, 10, 2, 9, 4, 3, 2, 12, 2, 5, 4, 4, 9, 9, 1, 4, 3, 5, 5, 3, 6,
];

/// 8124 samples, 112 binary features (one-hot over 22 categorical
/// attributes, so exactly 22 ones per row), labels `{1, 2}` (4208 / 3916).
pub fn mushrooms_like(seed: u64) -> Dataset {
    debug_assert_eq!(MUSHROOM_CARDINALITIES.iter().sum::<usize>(), MUSHROOMS_D);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // per class, per attribute category weights
    let mut tables: Vec<Vec<WeightedIndex<f64>>> = Vec::new();
    for _class in 0..2 {
        let per_attr = MUSHROOM_CARDINALITIES
            .iter()
            .map(|&c| {
                let w: Vec<f64> = (0..c).map(|_| rng.gen::<f64>().powi(3) + 1e-3).collect();
                WeightedIndex::new(w).unwrap()
            })
            .collect();
        tables.push(per_attr);
    }

    let mut labels: Vec<f64> = std::iter::repeat(1.0)
        .take(4208)
        .chain(std::iter::repeat(2.0).take(MUSHROOMS_N - 4208))
        .collect();
    labels.shuffle(&mut rng);

    let rows = labels
        .iter()
        .map(|&y| {
            let class = usize::from(y == 2.0);
            let mut offset = 0;
            let mut indices = Vec::with_capacity(MUSHROOM_CARDINALITIES.len());
            for (attr, &card) in MUSHROOM_CARDINALITIES.iter().enumerate() {
                indices.push(offset + tables[class][attr].sample(&mut rng));
                offset += card;
            }
            let values = vec![1.0; indices.len()];
            SparseRow::new(indices, values).unwrap()
        })
        .collect();
    Dataset::new(rows, labels, MUSHROOMS_D).unwrap()
}

/// Random sparse design with labels in `{-1, +1}`; each entry is nonzero
/// with probability `density`, values uniform in `[-scale, scale]`.
pub fn random_sparse(n: usize, d: usize, density: f64, scale: f64, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut labels = Vec::with_capacity(n);
    let rows = (0..n)
        .map(|_| {
            labels.push(if rng.gen_bool(0.5) { 1.0 } else { -1.0 });
            let dense: Vec<f64> = (0..d)
                .map(|_| {
                    if rng.gen_bool(density) {
                        rng.gen_range(-scale..=scale)
                    } else {
                        0.0
                    }
                })
                .collect();
            SparseRow::from_dense(&dense).unwrap()
        })
        .collect();
    Dataset::new(rows, labels, d).unwrap()
}
