//! Principal component analysis with explained-variance component selection.
//!
//! The covariance (n-1 normalizer, mean-centered, not standardized) is
//! diagonalized with the cyclic Jacobi method, which is plenty for the
//! feature widths used here (at most 84) and gives orthonormal eigenvectors
//! to machine precision.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{HarError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// All `d` eigenvectors as rows, by descending eigenvalue.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
    pub retained_k: usize,
    pub variance_threshold: f64,
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
/// Returns (eigenvalues, eigenvectors as columns), unsorted.
pub fn jacobi_eigen(a: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let n = a.nrows();
    let mut a = a.clone();
    let mut v = Array2::<f64>::eye(n);
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; n], v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[[i, j]] * a[[i, j]])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = c * akp - s * akq;
                    a[[k, q]] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = c * apk - s * aqk;
                    a[[q, k]] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = c * vkp - s * vkq;
                    v[[k, q]] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[[i, i]]).collect(), v)
}

/// Unbiased sample covariance of the rows.
pub fn sample_covariance(rows: ArrayView2<f64>) -> (Array1<f64>, Array2<f64>) {
    let n = rows.nrows();
    let mean = rows.mean_axis(Axis(0)).expect("at least one row");
    let centered = &rows - &mean;
    let cov = centered.t().dot(&centered) / (n as f64 - 1.0);
    (mean, cov)
}

/// Smallest k whose cumulative eigenvalue fraction reaches `threshold`.
pub fn select_k(eigenvalues: &[f64], threshold: f64) -> usize {
    let total: f64 = eigenvalues.iter().sum();
    let mut acc = 0.0;
    for (i, l) in eigenvalues.iter().enumerate() {
        acc += l;
        if acc >= threshold * total - 1e-12 * total {
            return i + 1;
        }
    }
    eigenvalues.len()
}

pub fn pca_fit(rows: ArrayView2<f64>, variance_threshold: f64) -> Result<PcaModel> {
    if !(variance_threshold > 0.0 && variance_threshold <= 1.0) {
        return Err(HarError::Config(format!(
            "variance threshold must lie in (0, 1], got {variance_threshold}"
        )));
    }
    if rows.nrows() < 2 || rows.ncols() == 0 {
        return Err(HarError::Config(
            "PCA needs at least two rows and one column".into(),
        ));
    }
    let (mean, cov) = sample_covariance(rows);
    let trace: f64 = cov.diag().sum();
    if trace.is_nan() || trace <= 0.0 {
        return Err(HarError::NoVariance);
    }
    let (values, vectors) = jacobi_eigen(&cov);
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));

    let mut eigenvalues = Vec::with_capacity(order.len());
    let mut components = Vec::with_capacity(order.len());
    for i in order {
        eigenvalues.push(values[i].max(0.0));
        let mut c: Vec<f64> = vectors.column(i).to_vec();
        let pivot = c.iter().copied().fold(
            0.0_f64,
            |best, x| if x.abs() > best.abs() { x } else { best },
        );
        if pivot < 0.0 {
            c.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(c);
    }
    let retained_k = select_k(&eigenvalues, variance_threshold);
    Ok(PcaModel {
        mean: mean.to_vec(),
        components,
        eigenvalues,
        retained_k,
        variance_threshold,
    })
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    /// Projects rows onto the first `k` components.
    pub fn transform_k(&self, rows: ArrayView2<f64>, k: usize) -> Result<Array2<f64>> {
        if rows.ncols() != self.dim() {
            return Err(HarError::DimensionMismatch {
                expected: self.dim(),
                actual: rows.ncols(),
            });
        }
        let k = k.min(self.components.len());
        let mut out = Array2::zeros((rows.nrows(), k));
        for (r, row) in rows.outer_iter().enumerate() {
            for (c, comp) in self.components[..k].iter().enumerate() {
                out[[r, c]] = row
                    .iter()
                    .zip(&self.mean)
                    .zip(comp)
                    .map(|((x, m), w)| (x - m) * w)
                    .sum();
            }
        }
        Ok(out)
    }

    pub fn transform(&self, rows: ArrayView2<f64>) -> Result<Array2<f64>> {
        self.transform_k(rows, self.retained_k)
    }

    /// Maps scores on the first `scores.ncols()` components back to feature space.
    pub fn reconstruct(&self, scores: ArrayView2<f64>) -> Array2<f64> {
        let k = scores.ncols();
        let mut out = Array2::zeros((scores.nrows(), self.dim()));
        for (r, s) in scores.outer_iter().enumerate() {
            for j in 0..self.dim() {
                out[[r, j]] =
                    self.mean[j] + (0..k).map(|c| s[c] * self.components[c][j]).sum::<f64>();
            }
        }
        out
    }
}
