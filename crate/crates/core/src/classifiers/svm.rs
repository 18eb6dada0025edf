//! Cubic-kernel support vector machine, one-vs-one.
//!
//! Each binary machine solves the C-SVC dual with SMO using second-order
//! working-set selection, stopping once the maximal KKT violation gap drops
//! below the tolerance. Features are z-scored on the training rows before
//! any kernel evaluation.

use ndarray::{Array2, ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const TAU: f64 = 1e-12;

/// (1 + a·b)³
pub fn cubic_kernel(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let base = 1.0 + dot;
    base * base * base
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: ArrayView2<f64>) -> Standardizer {
        let n = x.nrows() as f64;
        let mean = x.mean_axis(Axis(0)).expect("non-empty").to_vec();
        let scale = x
            .axis_iter(Axis(1))
            .zip(&mean)
            .map(|(col, m)| {
                let var = col.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0).max(1.0);
                let sd = var.sqrt();
                if sd > 0.0 {
                    sd
                } else {
                    1.0
                }
            })
            .collect();
        Standardizer { mean, scale }
    }

    pub fn apply(&self, x: ArrayView2<f64>) -> Array2<f64> {
        let mut out = x.to_owned();
        for mut row in out.outer_iter_mut() {
            for ((v, m), s) in row.iter_mut().zip(&self.mean).zip(&self.scale) {
                *v = (*v - m) / s;
            }
        }
        out
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(&self.mean)
            .zip(&self.scale)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }
}

/// A trained two-class machine. Targets are +1 for `positive`, -1 for `negative`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    pub positive: u8,
    pub negative: u8,
    pub support_vectors: Vec<Vec<f64>>,
    /// α_i y_i per support vector.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl BinarySvm {
    pub fn decision(&self, row: &[f64]) -> f64 {
        self.support_vectors
            .iter()
            .zip(&self.coefficients)
            .map(|(sv, c)| c * cubic_kernel(sv, row))
            .sum::<f64>()
            + self.bias
    }
}

enum KernelRows<'a> {
    Full(Array2<f64>),
    Lazy(&'a [Vec<f64>]),
}

impl KernelRows<'_> {
    fn row(&self, i: usize) -> std::borrow::Cow<'_, [f64]> {
        match self {
            KernelRows::Full(k) => {
                std::borrow::Cow::Borrowed(k.row(i).to_slice().expect("standard layout"))
            }
            KernelRows::Lazy(x) => {
                std::borrow::Cow::Owned(x.iter().map(|r| cubic_kernel(&x[i], r)).collect())
            }
        }
    }
}

/// Dual solution of a binary C-SVC problem.
#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub bias: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// SMO on rows `x` with targets `y` ∈ {+1, -1}.
pub fn solve_dual(x: &[Vec<f64>], y: &[f64], c: f64, tolerance: f64) -> DualSolution {
    let n = x.len();
    let kernel = if n <= 4000 {
        let mut k = Array2::zeros((n, n));
        for i in 0..n {
            for j in i..n {
                let v = cubic_kernel(&x[i], &x[j]);
                k[[i, j]] = v;
                k[[j, i]] = v;
            }
        }
        KernelRows::Full(k)
    } else {
        KernelRows::Lazy(x)
    };
    let diag: Vec<f64> = x.iter().map(|r| cubic_kernel(r, r)).collect();

    let mut alpha = vec![0.0; n];
    // gradient of ½αᵀQα - eᵀα, Q_ij = y_i y_j K_ij
    let mut grad = vec![-1.0; n];
    let in_up = |a: f64, yi: f64| (yi > 0.0 && a < c) || (yi < 0.0 && a > 0.0);
    let in_low = |a: f64, yi: f64| (yi > 0.0 && a > 0.0) || (yi < 0.0 && a < c);

    let max_iter = (100 * n).max(10_000_000);
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut gmax = f64::NEG_INFINITY;
        let mut i_sel = usize::MAX;
        for t in 0..n {
            if in_up(alpha[t], y[t]) {
                let v = -y[t] * grad[t];
                if v > gmax {
                    gmax = v;
                    i_sel = t;
                }
            }
        }
        let mut gmax2 = f64::NEG_INFINITY;
        let mut j_sel = usize::MAX;
        let mut best_obj = f64::INFINITY;
        let ki = if i_sel != usize::MAX {
            Some(kernel.row(i_sel))
        } else {
            None
        };
        for t in 0..n {
            if !in_low(alpha[t], y[t]) {
                continue;
            }
            let v = y[t] * grad[t];
            if v > gmax2 {
                gmax2 = v;
            }
            if let Some(ki) = &ki {
                let diff = gmax + v;
                if diff > 0.0 {
                    let quad = (diag[i_sel] + diag[t] - 2.0 * ki[t]).max(TAU);
                    let obj = -(diff * diff) / quad;
                    if obj < best_obj {
                        best_obj = obj;
                        j_sel = t;
                    }
                }
            }
        }
        if gmax + gmax2 < tolerance || j_sel == usize::MAX {
            converged = true;
            break;
        }
        iterations += 1;

        let (i, j) = (i_sel, j_sel);
        let ki = ki.expect("i selected");
        let kj = kernel.row(j);
        let qij = y[i] * y[j] * ki[j];
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (diag[i] + diag[j] + 2.0 * qij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (diag[i] + diag[j] - 2.0 * qij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }
        let (di, dj) = (alpha[i] - old_i, alpha[j] - old_j);
        for t in 0..n {
            grad[t] += y[t] * (y[i] * ki[t] * di + y[j] * kj[t] * dj);
        }
    }

    // bias from the free multipliers, or the midpoint of the feasible interval
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        let at_upper = alpha[t] >= c;
        let at_lower = alpha[t] <= 0.0;
        if at_upper {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if at_lower {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 {
        sum_free / n_free as f64
    } else {
        (ub + lb) / 2.0
    };
    DualSolution {
        alpha,
        bias: -rho,
        iterations,
        converged,
    }
}

/// Largest violation of the C-SVC optimality conditions, measured on the
/// margins y_i f(x_i): α=0 needs ≥ 1, α=C needs ≤ 1, free α needs = 1.
pub fn kkt_residual(x: &[Vec<f64>], y: &[f64], alpha: &[f64], bias: f64, c: f64) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..x.len() {
        let f: f64 = (0..x.len())
            .filter(|&j| alpha[j] > 0.0)
            .map(|j| alpha[j] * y[j] * cubic_kernel(&x[j], &x[i]))
            .sum::<f64>()
            + bias;
        let m = y[i] * f;
        let v = if alpha[i] <= 0.0 {
            (1.0 - m).max(0.0)
        } else if alpha[i] >= c {
            (m - 1.0).max(0.0)
        } else {
            (m - 1.0).abs()
        };
        worst = worst.max(v);
    }
    worst
}

impl BinarySvm {
    pub fn fit(
        x: &[Vec<f64>],
        labels: &[u8],
        positive: u8,
        negative: u8,
        c: f64,
        tolerance: f64,
    ) -> BinarySvm {
        let y: Vec<f64> = labels
            .iter()
            .map(|&l| if l == positive { 1.0 } else { -1.0 })
            .collect();
        let sol = solve_dual(x, &y, c, tolerance);
        let mut support_vectors = Vec::new();
        let mut coefficients = Vec::new();
        for (i, &a) in sol.alpha.iter().enumerate() {
            if a > 0.0 {
                support_vectors.push(x[i].clone());
                coefficients.push(a * y[i]);
            }
        }
        BinarySvm {
            positive,
            negative,
            support_vectors,
            coefficients,
            bias: sol.bias,
            iterations: sol.iterations,
            converged: sol.converged,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OvoSvm {
    pub scaler: Standardizer,
    pub classes: Vec<u8>,
    /// One machine per class pair (a < b), in lexicographic pair order.
    pub machines: Vec<BinarySvm>,
}

impl OvoSvm {
    pub fn fit(x: ArrayView2<f64>, y: &[u8], classes: &[u8], c: f64, tolerance: f64) -> OvoSvm {
        let scaler = Standardizer::fit(x);
        let z = scaler.apply(x);
        let pairs: Vec<(u8, u8)> = classes
            .iter()
            .enumerate()
            .flat_map(|(i, &a)| classes[i + 1..].iter().map(move |&b| (a, b)))
            .collect();
        let machines = pairs
            .par_iter()
            .map(|&(a, b)| {
                let (rows, labels): (Vec<Vec<f64>>, Vec<u8>) = z
                    .outer_iter()
                    .zip(y)
                    .filter(|(_, &l)| l == a || l == b)
                    .map(|(r, &l)| (r.to_vec(), l))
                    .unzip();
                BinarySvm::fit(&rows, &labels, a, b, c, tolerance)
            })
            .collect();
        OvoSvm {
            scaler,
            classes: classes.to_vec(),
            machines,
        }
    }

    /// Majority vote; ties by summed decision values, then smallest label.
    pub fn predict_row(&self, row: &[f64]) -> u8 {
        let z = self.scaler.apply_row(row);
        let k = self.classes.len();
        let mut votes = vec![0usize; k];
        let mut scores = vec![0.0; k];
        for m in &self.machines {
            let v = m.decision(&z);
            let a = self
                .classes
                .binary_search(&m.positive)
                .expect("known class");
            let b = self
                .classes
                .binary_search(&m.negative)
                .expect("known class");
            if v > 0.0 {
                votes[a] += 1;
            } else {
                votes[b] += 1;
            }
            scores[a] += v;
            scores[b] -= v;
        }
        let mut best = 0;
        for i in 1..k {
            if votes[i] > votes[best] || (votes[i] == votes[best] && scores[i] > scores[best]) {
                best = i;
            }
        }
        self.classes[best]
    }
}
