//! Linear discriminant analysis with a shared (pooled) covariance.

use nalgebra::{DMatrix, DVector};
use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{HarError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lda {
    pub classes: Vec<u8>,
    /// Σ⁻¹ μ_k per class.
    pub weights: Vec<Vec<f64>>,
    /// -½ μ_kᵀ Σ⁻¹ μ_k + ln π_k per class.
    pub intercepts: Vec<f64>,
    /// Diagonal loading added to make the pooled covariance invertible.
    pub ridge: f64,
}

impl Lda {
    pub fn fit(x: ArrayView2<f64>, y: &[u8], classes: &[u8]) -> Result<Lda> {
        let (n, d) = x.dim();
        let kc = classes.len();
        let mut means = vec![vec![0.0; d]; kc];
        let mut counts = vec![0usize; kc];
        let class_of: Vec<usize> = y
            .iter()
            .map(|l| classes.binary_search(l).expect("label in class set"))
            .collect();
        for (row, &k) in x.outer_iter().zip(&class_of) {
            counts[k] += 1;
            for (m, v) in means[k].iter_mut().zip(row) {
                *m += v;
            }
        }
        for (m, &c) in means.iter_mut().zip(&counts) {
            m.iter_mut().for_each(|v| *v /= c as f64);
        }

        let mut cov = DMatrix::<f64>::zeros(d, d);
        for (row, &k) in x.outer_iter().zip(&class_of) {
            let diff = DVector::from_iterator(d, row.iter().zip(&means[k]).map(|(a, b)| a - b));
            cov.ger(1.0, &diff, &diff, 1.0);
        }
        let dof = n.saturating_sub(kc).max(1) as f64;
        cov /= dof;

        let trace = cov.trace();
        let mut ridge = 0.0;
        let chol = loop {
            let mut loaded = cov.clone();
            for i in 0..d {
                loaded[(i, i)] += ridge;
            }
            if let Some(c) = loaded.cholesky() {
                break c;
            }
            ridge = if ridge == 0.0 {
                if trace > 0.0 {
                    1e-6 * trace / d as f64
                } else {
                    1e-6
                }
            } else {
                ridge * 10.0
            };
            if ridge > trace.max(1.0) * 1e3 {
                return Err(HarError::Config(
                    "singular pooled covariance: add regularization or more data".into(),
                ));
            }
        };

        let mut weights = Vec::with_capacity(kc);
        let mut intercepts = Vec::with_capacity(kc);
        for (m, &c) in means.iter().zip(&counts) {
            let mu = DVector::from_column_slice(m);
            let w = chol.solve(&mu);
            intercepts.push(-0.5 * mu.dot(&w) + (c as f64 / n as f64).ln());
            weights.push(w.iter().copied().collect());
        }
        Ok(Lda {
            classes: classes.to_vec(),
            weights,
            intercepts,
            ridge,
        })
    }

    pub fn scores(&self, row: &[f64]) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.intercepts)
            .map(|(w, b)| w.iter().zip(row).map(|(a, x)| a * x).sum::<f64>() + b)
            .collect()
    }

    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let s = self.scores(row);
        let mut best = 0;
        for k in 1..s.len() {
            if s[k] > s[best] {
                best = k;
            }
        }
        self.classes[best]
    }

    /// Normal of the decision boundary between classes `a` and `b`.
    pub fn boundary_normal(&self, a: u8, b: u8) -> Option<Vec<f64>> {
        let ia = self.classes.binary_search(&a).ok()?;
        let ib = self.classes.binary_search(&b).ok()?;
        Some(
            self.weights[ia]
                .iter()
                .zip(&self.weights[ib])
                .map(|(x, y)| x - y)
                .collect(),
        )
    }
}
