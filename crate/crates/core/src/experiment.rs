//! End-to-end experiment: features, split, cross-validation on the
//! train+test pool, a final fit on the pool, and a report on the held-out
//! validation rows.

use std::fs;
use std::path::Path;

use ndarray::Axis;
use serde::{Deserialize, Serialize};

use crate::config::PipelineConfig;
use crate::dataset::DatasetManifest;
use crate::error::{HarError, Result};
use crate::eval::{
    compute_report, cross_validate, fit_pipeline, split, CvOptions, EvalReport, FittedPipeline,
};
use crate::features::{build_feature_matrix, FeatureMatrix};
use crate::rng::sub_seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowCounts {
    pub train: usize,
    pub test: usize,
    pub validation: usize,
}

/// Contents of `report.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub manifest_id: String,
    pub feature_dim: usize,
    /// Classifier input width (after PCA, when enabled).
    pub model_dim: usize,
    pub rows: RowCounts,
    /// S-fold cross-validation over train+test.
    pub cross_validation: EvalReport,
    /// Final model (fit on train+test) scored on the validation rows.
    pub validation: EvalReport,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: ExperimentReport,
    pub pipeline: FittedPipeline,
}

pub fn run_experiment(
    config: &PipelineConfig,
    manifest: &DatasetManifest,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let matrix = build_feature_matrix(manifest, &config.extraction, true)?;
    run_on_features(config, &matrix)
}

/// The experiment on an already extracted, labeled feature matrix.
pub fn run_on_features(
    config: &PipelineConfig,
    matrix: &FeatureMatrix,
) -> Result<ExperimentOutcome> {
    config.validate()?;
    let labels = matrix.require_labels()?;
    let parts = split(labels, &matrix.groups, &config.split)?;
    let pool = parts.pool();

    let cv = cross_validate(
        &config.classifier,
        matrix.rows.view(),
        labels,
        &matrix.groups,
        &pool,
        &CvOptions {
            folds: config.folds,
            stratify_by: config.split.stratify_by,
            seed: sub_seed(config.seed, &[1]),
            pca_threshold: config.pca.threshold(),
        },
    )?;

    let pool_x = matrix.rows.select(Axis(0), &pool);
    let pool_y: Vec<u8> = pool.iter().map(|&i| labels[i]).collect();
    let pipeline = fit_pipeline(
        &config.classifier,
        pool_x.view(),
        &pool_y,
        config.pca.threshold(),
    )?;

    let val_x = matrix.rows.select(Axis(0), &parts.validation);
    let val_y: Vec<u8> = parts.validation.iter().map(|&i| labels[i]).collect();
    let mut validation = compute_report(&val_y, &pipeline.predict(val_x.view())?)?;
    validation.protocol = "held-out validation".into();

    Ok(ExperimentOutcome {
        report: ExperimentReport {
            manifest_id: matrix.provenance.manifest_id.clone(),
            feature_dim: matrix.n_features(),
            model_dim: pipeline.model_dim(),
            rows: RowCounts {
                train: parts.train.len(),
                test: parts.test.len(),
                validation: parts.validation.len(),
            },
            cross_validation: cv,
            validation,
        },
        pipeline,
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HarError::io(path, e))
}

/// Writes `report.json`, `confusion.csv` (validation confusion),
/// `config.json` and `model.json` into `dir`, creating it if needed.
pub fn write_bundle(
    dir: &Path,
    config: &PipelineConfig,
    outcome: &ExperimentOutcome,
) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| HarError::io(dir, e))?;
    write(
        &dir.join("report.json"),
        &(serde_json::to_string_pretty(&outcome.report)? + "\n"),
    )?;
    write(
        &dir.join("confusion.csv"),
        &outcome.report.validation.confusion_csv(),
    )?;
    write(
        &dir.join("config.json"),
        &(serde_json::to_string_pretty(config)? + "\n"),
    )?;
    write(
        &dir.join("model.json"),
        &(serde_json::to_string(&outcome.pipeline)? + "\n"),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_synthetic, SynthSpec};

    fn small_manifest() -> DatasetManifest {
        generate_synthetic(&SynthSpec {
            n_participants: 5,
            frames_per_sequence: 55,
            ..SynthSpec::default()
        })
        .unwrap()
    }

    #[test]
    fn validation_rows_do_not_reach_the_model() {
        let cfg = PipelineConfig::default();
        let m = small_manifest();
        let matrix = build_feature_matrix(&m, &cfg.extraction, true).unwrap();
        let a = run_on_features(&cfg, &matrix).unwrap();

        let parts = split(matrix.require_labels().unwrap(), &matrix.groups, &cfg.split).unwrap();
        let mut tampered = matrix.clone();
        for &i in &parts.validation {
            tampered.rows.row_mut(i).fill(1234.5);
        }
        let b = run_on_features(&cfg, &tampered).unwrap();
        assert_eq!(
            serde_json::to_string(&a.pipeline).unwrap(),
            serde_json::to_string(&b.pipeline).unwrap()
        );
        assert_eq!(a.report.cross_validation, b.report.cross_validation);
    }

    #[test]
    fn bundle_files_exist() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = PipelineConfig::default();
        let out = run_experiment(&cfg, &small_manifest()).unwrap();
        write_bundle(dir.path(), &cfg, &out).unwrap();
        for f in ["report.json", "confusion.csv", "config.json", "model.json"] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
        let r = out.report;
        assert_eq!(r.rows.train + r.rows.test + r.rows.validation, 5 * 9 * 51);
    }
}
