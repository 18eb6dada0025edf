//! One-hidden-layer perceptron: ReLU hidden units, softmax output,
//! mean cross-entropy loss, plain mini-batch gradient descent.

use ndarray::{Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::rng::rng_from;

/// Flat parameter vector laid out as `W1 (h×d) | b1 (h) | W2 (k×h) | b2 (k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpWeights {
    pub inputs: usize,
    pub hidden: usize,
    pub outputs: usize,
    pub values: Vec<f64>,
}

impl MlpWeights {
    pub fn len_for(inputs: usize, hidden: usize, outputs: usize) -> usize {
        hidden * inputs + hidden + outputs * hidden + outputs
    }

    pub fn zeros(inputs: usize, hidden: usize, outputs: usize) -> MlpWeights {
        MlpWeights {
            inputs,
            hidden,
            outputs,
            values: vec![0.0; Self::len_for(inputs, hidden, outputs)],
        }
    }

    /// Uniform in ±√(6/(fan_in+fan_out)) for weight matrices, zero biases.
    pub fn glorot<R: Rng>(inputs: usize, hidden: usize, outputs: usize, rng: &mut R) -> MlpWeights {
        let mut w = Self::zeros(inputs, hidden, outputs);
        let l1 = (6.0 / (inputs + hidden) as f64).sqrt();
        let l2 = (6.0 / (hidden + outputs) as f64).sqrt();
        let (w1, _, w2, _) = w.offsets();
        for v in &mut w.values[w1.0..w1.1] {
            *v = rng.random_range(-l1..=l1);
        }
        for v in &mut w.values[w2.0..w2.1] {
            *v = rng.random_range(-l2..=l2);
        }
        w
    }

    #[allow(clippy::type_complexity)]
    fn offsets(
        &self,
    ) -> (
        (usize, usize),
        (usize, usize),
        (usize, usize),
        (usize, usize),
    ) {
        let (d, h, k) = (self.inputs, self.hidden, self.outputs);
        let a = h * d;
        let b = a + h;
        let c = b + k * h;
        ((0, a), (a, b), (b, c), (c, c + k))
    }

    fn unpack(&self) -> (Array2<f64>, Array1<f64>, Array2<f64>, Array1<f64>) {
        let (w1, b1, w2, b2) = self.offsets();
        let v = &self.values;
        (
            Array2::from_shape_vec((self.hidden, self.inputs), v[w1.0..w1.1].to_vec())
                .expect("layout"),
            Array1::from(v[b1.0..b1.1].to_vec()),
            Array2::from_shape_vec((self.outputs, self.hidden), v[w2.0..w2.1].to_vec())
                .expect("layout"),
            Array1::from(v[b2.0..b2.1].to_vec()),
        )
    }
}

struct Forward {
    pre_hidden: Array2<f64>,
    hidden: Array2<f64>,
    probs: Array2<f64>,
}

fn forward(w: &MlpWeights, x: ArrayView2<f64>) -> Forward {
    let (w1, b1, w2, b2) = w.unpack();
    let pre_hidden = x.dot(&w1.t()) + &b1;
    let hidden = pre_hidden.mapv(|v| v.max(0.0));
    let mut probs = hidden.dot(&w2.t()) + &b2;
    for mut row in probs.outer_iter_mut() {
        let m = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        row.mapv_inplace(|v| (v - m).exp());
        let z = row.sum();
        row.mapv_inplace(|v| v / z);
    }
    Forward {
        pre_hidden,
        hidden,
        probs,
    }
}

/// Mean cross-entropy over the batch and its gradient in the flat layout.
/// `targets` are output-unit indices.
pub fn mlp_loss_and_gradient(
    w: &MlpWeights,
    x: ArrayView2<f64>,
    targets: &[usize],
) -> (f64, Vec<f64>) {
    let n = x.nrows() as f64;
    let fw = forward(w, x);
    let (_, _, w2, _) = w.unpack();

    let mut loss = 0.0;
    let mut d_out = fw.probs.clone();
    for (i, &t) in targets.iter().enumerate() {
        loss -= fw.probs[[i, t]].max(f64::MIN_POSITIVE).ln();
        d_out[[i, t]] -= 1.0;
    }
    loss /= n;
    d_out /= n;

    let g_w2 = d_out.t().dot(&fw.hidden);
    let g_b2 = d_out.sum_axis(Axis(0));
    let mut d_hidden = d_out.dot(&w2);
    d_hidden.zip_mut_with(&fw.pre_hidden, |g, &z| {
        if z <= 0.0 {
            *g = 0.0
        }
    });
    let g_w1 = d_hidden.t().dot(&x);
    let g_b1 = d_hidden.sum_axis(Axis(0));

    let mut grad = Vec::with_capacity(w.values.len());
    grad.extend(g_w1.iter());
    grad.extend(g_b1.iter());
    grad.extend(g_w2.iter());
    grad.extend(g_b2.iter());
    (loss, grad)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mlp {
    pub classes: Vec<u8>,
    pub weights: MlpWeights,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MlpTraining {
    pub hidden_width: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
}

impl Mlp {
    pub fn fit(x: ArrayView2<f64>, y: &[u8], classes: &[u8], opts: MlpTraining, seed: u64) -> Mlp {
        let targets: Vec<usize> = y
            .iter()
            .map(|l| classes.binary_search(l).expect("label in class set"))
            .collect();
        let mut init_rng = rng_from(seed, &[0]);
        let mut weights =
            MlpWeights::glorot(x.ncols(), opts.hidden_width, classes.len(), &mut init_rng);
        let mut order: Vec<usize> = (0..x.nrows()).collect();
        let mut shuffle_rng = rng_from(seed, &[1]);
        let batch = opts.batch_size.max(1);
        for _ in 0..opts.epochs {
            order.shuffle(&mut shuffle_rng);
            for chunk in order.chunks(batch) {
                let xb = x.select(Axis(0), chunk);
                let tb: Vec<usize> = chunk.iter().map(|&i| targets[i]).collect();
                let (_, g) = mlp_loss_and_gradient(&weights, xb.view(), &tb);
                for (w, g) in weights.values.iter_mut().zip(g) {
                    *w -= opts.learning_rate * g;
                }
            }
        }
        Mlp {
            classes: classes.to_vec(),
            weights,
        }
    }

    pub fn predict(&self, x: ArrayView2<f64>) -> Vec<u8> {
        let fw = forward(&self.weights, x);
        fw.probs
            .outer_iter()
            .map(|p| {
                let mut best = 0;
                for k in 1..p.len() {
                    if p[k] > p[best] {
                        best = k;
                    }
                }
                self.classes[best]
            })
            .collect()
    }

    pub fn predict_proba(&self, x: ArrayView2<f64>) -> Array2<f64> {
        forward(&self.weights, x).probs
    }
}
