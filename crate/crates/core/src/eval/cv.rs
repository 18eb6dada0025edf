//! S-fold cross-validation. PCA (when enabled) is refit on every training
//! fold so held-out rows never influence the projection.

use ndarray::{ArrayView2, Axis};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_report, EvalReport};
use super::split::{fold_assignment, Stratify};
use crate::classifiers::{predict, train, ClassifierSpec, TrainedModel};
use crate::error::{HarError, Result};
use crate::pca::{pca_fit, PcaModel};
use crate::rng::sub_seed;

/// Optional PCA followed by a classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedPipeline {
    pub pca: Option<PcaModel>,
    pub model: TrainedModel,
}

pub fn fit_pipeline(
    spec: &ClassifierSpec,
    x: ArrayView2<f64>,
    y: &[u8],
    pca_threshold: Option<f64>,
) -> Result<FittedPipeline> {
    match pca_threshold {
        None => Ok(FittedPipeline {
            pca: None,
            model: train(spec, x, y)?,
        }),
        Some(t) => {
            let pca = pca_fit(x, t)?;
            let z = pca.transform(x)?;
            Ok(FittedPipeline {
                model: train(spec, z.view(), y)?,
                pca: Some(pca),
            })
        }
    }
}

impl FittedPipeline {
    pub fn predict(&self, x: ArrayView2<f64>) -> Result<Vec<u8>> {
        match &self.pca {
            None => predict(&self.model, x),
            Some(p) => predict(&self.model, p.transform(x)?.view()),
        }
    }

    /// Width of the classifier input.
    pub fn model_dim(&self) -> usize {
        self.model.n_features
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub folds: usize,
    pub stratify_by: Stratify,
    pub seed: u64,
    pub pca_threshold: Option<f64>,
}

/// Cross-validates over the listed rows with a seeded stratified assignment.
pub fn cross_validate(
    spec: &ClassifierSpec,
    x: ArrayView2<f64>,
    labels: &[u8],
    groups: &[u32],
    rows: &[usize],
    opts: &CvOptions,
) -> Result<EvalReport> {
    let assignment = fold_assignment(
        rows,
        labels,
        groups,
        opts.folds,
        opts.stratify_by,
        opts.seed,
    )?;
    let sub_x = x.select(Axis(0), rows);
    let sub_y: Vec<u8> = rows.iter().map(|&i| labels[i]).collect();
    cross_validate_with_assignment(
        spec,
        sub_x.view(),
        &sub_y,
        &assignment,
        opts.folds,
        opts.pca_threshold,
    )
}

/// Cross-validation with an explicit fold number per row. Every fold trains
/// a fresh pipeline whose classifier seed is derived from the fold number;
/// the pooled out-of-fold predictions form the report.
pub fn cross_validate_with_assignment(
    spec: &ClassifierSpec,
    x: ArrayView2<f64>,
    y: &[u8],
    assignment: &[usize],
    folds: usize,
    pca_threshold: Option<f64>,
) -> Result<EvalReport> {
    if assignment.len() != y.len() || x.nrows() != y.len() {
        return Err(HarError::DimensionMismatch {
            expected: y.len(),
            actual: assignment.len().min(x.nrows()),
        });
    }
    if let Some(f) = assignment.iter().find(|&&f| f >= folds) {
        return Err(HarError::Partition(format!(
            "fold {f} out of range 0..{folds}"
        )));
    }
    let per_fold: Vec<Result<(Vec<usize>, Vec<u8>)>> = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (held, kept): (Vec<usize>, Vec<usize>) =
                (0..y.len()).partition(|&i| assignment[i] == fold);
            if held.is_empty() || kept.is_empty() {
                return Err(HarError::Partition(format!(
                    "fold {fold} is empty or covers every row"
                )));
            }
            let fold_spec =
                ClassifierSpec::new(spec.model.clone(), sub_seed(spec.seed, &[fold as u64]));
            let train_y: Vec<u8> = kept.iter().map(|&i| y[i]).collect();
            let pipe = fit_pipeline(
                &fold_spec,
                x.select(Axis(0), &kept).view(),
                &train_y,
                pca_threshold,
            )?;
            let pred = pipe.predict(x.select(Axis(0), &held).view())?;
            Ok((held, pred))
        })
        .collect();

    let mut predicted = vec![0u8; y.len()];
    let mut fold_acc = Vec::with_capacity(folds);
    for r in per_fold {
        let (held, pred) = r?;
        let hits = held.iter().zip(&pred).filter(|(&i, &p)| y[i] == p).count();
        fold_acc.push(hits as f64 / held.len() as f64);
        for (i, p) in held.into_iter().zip(pred) {
            predicted[i] = p;
        }
    }
    let mut report = compute_report(y, &predicted)?;
    report.protocol = format!("{folds}-fold cross-validation");
    report.fold_accuracies = Some(fold_acc);
    Ok(report)
}
