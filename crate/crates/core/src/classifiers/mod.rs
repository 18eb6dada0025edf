//! The six benchmark classifiers behind one train / predict contract.

pub mod bagging;
pub mod knn;
pub mod lda;
pub mod mlp;
pub mod svm;
pub mod tree;

use std::fmt;

use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{HarError, Result};

pub use bagging::BaggedTrees;
pub use knn::Knn;
pub use lda::Lda;
pub use mlp::{mlp_loss_and_gradient, Mlp, MlpTraining, MlpWeights};
pub use svm::OvoSvm;
pub use tree::DecisionTree;

/// Model family and hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ModelSpec {
    FineTree {
        max_splits: usize,
    },
    BaggedTrees {
        n_trees: usize,
        max_splits: usize,
    },
    FineKnn {
        k: usize,
    },
    CubicSvm {
        c: f64,
        tolerance: f64,
    },
    LinearDiscriminant,
    Mlp {
        hidden_width: usize,
        epochs: usize,
        learning_rate: f64,
        batch_size: usize,
    },
}

impl ModelSpec {
    pub fn fine_tree() -> Self {
        ModelSpec::FineTree { max_splits: 100 }
    }

    pub fn bagged_trees() -> Self {
        ModelSpec::BaggedTrees {
            n_trees: 30,
            max_splits: 100,
        }
    }

    pub fn fine_knn() -> Self {
        ModelSpec::FineKnn { k: 1 }
    }

    pub fn cubic_svm() -> Self {
        ModelSpec::CubicSvm {
            c: 1.0,
            tolerance: 1e-3,
        }
    }

    pub fn mlp() -> Self {
        ModelSpec::Mlp {
            hidden_width: 175,
            epochs: 200,
            learning_rate: 0.01,
            batch_size: 32,
        }
    }

    /// CLI name of the family.
    pub fn family_name(&self) -> &'static str {
        match self {
            ModelSpec::FineTree { .. } => "tree",
            ModelSpec::BaggedTrees { .. } => "bagged",
            ModelSpec::FineKnn { .. } => "knn",
            ModelSpec::CubicSvm { .. } => "svm-cubic",
            ModelSpec::LinearDiscriminant => "lda",
            ModelSpec::Mlp { .. } => "mlp",
        }
    }

    /// Default hyperparameters for a CLI family name.
    pub fn from_family(name: &str) -> Result<Self> {
        Ok(match name {
            "tree" => Self::fine_tree(),
            "bagged" => Self::bagged_trees(),
            "knn" => Self::fine_knn(),
            "svm-cubic" => Self::cubic_svm(),
            "lda" => ModelSpec::LinearDiscriminant,
            "mlp" => Self::mlp(),
            _ => {
                return Err(HarError::Config(format!(
                    "unknown classifier {name:?}; expected one of tree, lda, svm-cubic, knn, bagged, mlp"
                )))
            }
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarError::Config(m.to_string()));
        match *self {
            ModelSpec::FineKnn { k: 0 } => bad("k must be >= 1"),
            ModelSpec::BaggedTrees { n_trees: 0, .. } => bad("n_trees must be >= 1"),
            ModelSpec::CubicSvm { c, tolerance } if !positive(c) || !positive(tolerance) => {
                bad("SVM box constraint and tolerance must be > 0")
            }
            ModelSpec::Mlp {
                hidden_width,
                batch_size,
                learning_rate,
                ..
            } if hidden_width == 0 || batch_size == 0 || !positive(learning_rate) => {
                bad("MLP width, batch size and learning rate must be positive")
            }
            _ => Ok(()),
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.family_name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierSpec {
    pub model: ModelSpec,
    pub seed: u64,
}

impl ClassifierSpec {
    pub fn new(model: ModelSpec, seed: u64) -> Self {
        ClassifierSpec { model, seed }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", content = "parameters", rename_all = "snake_case")]
pub enum ModelParams {
    FineTree(DecisionTree),
    BaggedTrees(BaggedTrees),
    FineKnn(Knn),
    CubicSvm(OvoSvm),
    LinearDiscriminant(Lda),
    Mlp(Mlp),
}

/// A fitted classifier. Serializes to a self-describing JSON bundle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub spec: ClassifierSpec,
    pub class_set: Vec<u8>,
    pub n_features: usize,
    pub params: ModelParams,
}

/// False for NaN.
fn positive(v: f64) -> bool {
    v > 0.0
}

/// Majority vote, ties to the smallest label.
pub(crate) fn vote(labels: impl Iterator<Item = u8>) -> u8 {
    let mut counts = [0usize; 256];
    for l in labels {
        counts[usize::from(l)] += 1;
    }
    let mut best = 0;
    for (l, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = l;
        }
    }
    best as u8
}

fn check_finite(x: ArrayView2<f64>) -> Result<()> {
    for ((row, col), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(HarError::NonFinite { row, col });
        }
    }
    Ok(())
}

pub fn train(spec: &ClassifierSpec, x: ArrayView2<f64>, y: &[u8]) -> Result<TrainedModel> {
    spec.model.validate()?;
    if x.nrows() != y.len() {
        return Err(HarError::DimensionMismatch {
            expected: x.nrows(),
            actual: y.len(),
        });
    }
    check_finite(x)?;
    let mut classes = y.to_vec();
    classes.sort_unstable();
    classes.dedup();
    if classes.len() < 2 {
        return Err(HarError::SingleClass);
    }
    let all: Vec<usize> = (0..x.nrows()).collect();
    let params = match spec.model {
        ModelSpec::FineTree { max_splits } => {
            ModelParams::FineTree(DecisionTree::fit(x, y, &all, &classes, max_splits))
        }
        ModelSpec::BaggedTrees {
            n_trees,
            max_splits,
        } => ModelParams::BaggedTrees(BaggedTrees::fit(
            x, y, &classes, n_trees, max_splits, spec.seed,
        )),
        ModelSpec::FineKnn { k } => ModelParams::FineKnn(Knn::fit(x, y, k)),
        ModelSpec::CubicSvm { c, tolerance } => {
            ModelParams::CubicSvm(OvoSvm::fit(x, y, &classes, c, tolerance))
        }
        ModelSpec::LinearDiscriminant => ModelParams::LinearDiscriminant(Lda::fit(x, y, &classes)?),
        ModelSpec::Mlp {
            hidden_width,
            epochs,
            learning_rate,
            batch_size,
        } => ModelParams::Mlp(Mlp::fit(
            x,
            y,
            &classes,
            MlpTraining {
                hidden_width,
                epochs,
                learning_rate,
                batch_size,
            },
            spec.seed,
        )),
    };
    Ok(TrainedModel {
        spec: spec.clone(),
        class_set: classes,
        n_features: x.ncols(),
        params,
    })
}

pub fn predict(model: &TrainedModel, x: ArrayView2<f64>) -> Result<Vec<u8>> {
    if x.ncols() != model.n_features {
        return Err(HarError::DimensionMismatch {
            expected: model.n_features,
            actual: x.ncols(),
        });
    }
    let rows = || x.outer_iter().map(|r| r.to_vec());
    Ok(match &model.params {
        ModelParams::FineTree(t) => rows().map(|r| t.predict_row(&r)).collect(),
        ModelParams::BaggedTrees(b) => rows().map(|r| b.predict_row(&r)).collect(),
        ModelParams::FineKnn(k) => k.predict(x),
        ModelParams::CubicSvm(s) => {
            use rayon::prelude::*;
            let rows: Vec<Vec<f64>> = rows().collect();
            rows.par_iter().map(|r| s.predict_row(r)).collect()
        }
        ModelParams::LinearDiscriminant(l) => rows().map(|r| l.predict_row(&r)).collect(),
        ModelParams::Mlp(m) => m.predict(x),
    })
}

impl TrainedModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<TrainedModel> {
        Ok(serde_json::from_str(text)?)
    }
}
