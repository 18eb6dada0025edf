//! Exhaustive k-nearest-neighbour classification (Euclidean, unweighted).
//!
//! Neighbours are ranked by (squared distance, training row index); the k
//! best vote and a vote tie goes to the smallest label.

use ndarray::{Array2, ArrayView2};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::vote;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Knn {
    pub k: usize,
    pub points: Array2<f64>,
    pub labels: Vec<u8>,
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl Knn {
    pub fn fit(x: ArrayView2<f64>, y: &[u8], k: usize) -> Knn {
        Knn {
            k,
            points: x.to_owned(),
            labels: y.to_vec(),
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let mut ranked: Vec<(f64, usize)> = self
            .points
            .outer_iter()
            .enumerate()
            .map(|(i, p)| {
                (
                    squared_distance(p.as_slice().expect("contiguous row"), row),
                    i,
                )
            })
            .collect();
        let cmp = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        let k = self.k.min(ranked.len());
        if k < ranked.len() {
            ranked.select_nth_unstable_by(k - 1, cmp);
            ranked.truncate(k);
        }
        vote(ranked.iter().map(|&(_, i)| self.labels[i]))
    }

    pub fn predict(&self, rows: ArrayView2<f64>) -> Vec<u8> {
        let rows: Vec<Vec<f64>> = rows.outer_iter().map(|r| r.to_vec()).collect();
        rows.par_iter().map(|r| self.predict_row(r)).collect()
    }
}
