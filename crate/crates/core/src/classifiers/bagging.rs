//! Bootstrap-aggregated CART trees (no feature subsampling).

use ndarray::ArrayView2;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tree::DecisionTree;
use super::vote;
use crate::rng::rng_from;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaggedTrees {
    pub trees: Vec<DecisionTree>,
}

/// Bootstrap draw for ensemble member `member`: n indices with replacement.
pub fn bootstrap(n: usize, seed: u64, member: usize) -> Vec<usize> {
    let mut rng = rng_from(seed, &[member as u64]);
    (0..n).map(|_| rng.random_range(0..n)).collect()
}

impl BaggedTrees {
    pub fn fit(
        x: ArrayView2<f64>,
        y: &[u8],
        classes: &[u8],
        n_trees: usize,
        max_splits: usize,
        seed: u64,
    ) -> BaggedTrees {
        let samples: Vec<Vec<usize>> = (0..n_trees)
            .map(|t| bootstrap(x.nrows(), seed, t))
            .collect();
        Self::fit_with_samples(x, y, classes, &samples, max_splits)
    }

    /// Trains one tree per supplied sample list.
    pub fn fit_with_samples(
        x: ArrayView2<f64>,
        y: &[u8],
        classes: &[u8],
        samples: &[Vec<usize>],
        max_splits: usize,
    ) -> BaggedTrees {
        let trees = samples
            .par_iter()
            .map(|s| DecisionTree::fit(x, y, s, classes, max_splits))
            .collect();
        BaggedTrees { trees }
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        vote(self.trees.iter().map(|t| t.predict_row(row)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bootstrap_is_seeded() {
        assert_eq!(bootstrap(50, 9, 3), bootstrap(50, 9, 3));
        assert_ne!(bootstrap(50, 9, 3), bootstrap(50, 9, 4));
        assert!(bootstrap(50, 9, 3).iter().all(|&i| i < 50));
    }
}
