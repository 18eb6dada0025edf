//! Python bindings. Matrices cross the boundary as lists of rows; reports
//! and models as JSON strings.

use ndarray::Array2;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use ::skelhar as core;
use core::classifiers::{ClassifierSpec, ModelSpec, TrainedModel};
use core::config::{set_hyperparameter, PipelineConfig};
use core::dataset::{DatasetManifest, SynthLayout, SynthSpec};
use core::features::ExtractionConfig;

fn err(e: core::HarError) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_array(rows: Vec<Vec<f64>>) -> PyResult<Array2<f64>> {
    let width = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != width) {
        return Err(PyValueError::new_err("rows must all have the same length"));
    }
    let n = rows.len();
    Array2::from_shape_vec((n, width), rows.into_iter().flatten().collect())
        .map_err(|e| PyValueError::new_err(e.to_string()))
}

fn to_rows(a: &Array2<f64>) -> Vec<Vec<f64>> {
    a.outer_iter().map(|r| r.to_vec()).collect()
}

/// A validated collection of labeled skeleton sequences.
#[pyclass(name = "Dataset", frozen)]
struct PyDataset(DatasetManifest);

#[pymethods]
impl PyDataset {
    #[staticmethod]
    fn read(path: &str) -> PyResult<Self> {
        core::dataset::read_dataset(path.as_ref())
            .map(PyDataset)
            .map_err(err)
    }

    fn write(&self, path: &str) -> PyResult<()> {
        core::dataset::write_dataset(&self.0, path.as_ref()).map_err(err)
    }

    fn fingerprint(&self) -> String {
        self.0.fingerprint()
    }

    /// (participant, activity label, frame count) per sequence.
    fn sequences(&self) -> Vec<(u32, u8, usize)> {
        self.0
            .sequences()
            .iter()
            .map(|s| (s.participant_id, s.activity.label(), s.frames.len()))
            .collect()
    }

    fn __len__(&self) -> usize {
        self.0.len()
    }
}

#[pyfunction]
#[pyo3(signature = (participants=16, frames=60, noise=0.01, seed=42, layout="standard"))]
fn generate_synthetic(
    participants: u32,
    frames: usize,
    noise: f64,
    seed: u64,
    layout: &str,
) -> PyResult<PyDataset> {
    let layout = match layout {
        "standard" => SynthLayout::Standard,
        "depth" => SynthLayout::DepthSeparated,
        _ => {
            return Err(PyValueError::new_err(
                "layout must be 'standard' or 'depth'",
            ))
        }
    };
    let spec = SynthSpec {
        n_participants: participants,
        frames_per_sequence: frames,
        noise_sigma: noise,
        seed,
        layout,
        ..SynthSpec::default()
    };
    core::dataset::generate_synthetic(&spec)
        .map(PyDataset)
        .map_err(err)
}

type Features = (Vec<Vec<f64>>, Vec<u8>, Vec<u32>);

/// Feature rows, labels and participant ids.
#[pyfunction]
#[pyo3(signature = (dataset, modality="coordinates", joints="c28", dims=3))]
fn extract(dataset: &PyDataset, modality: &str, joints: &str, dims: u8) -> PyResult<Features> {
    let cfg = ExtractionConfig {
        modality: modality.parse().map_err(err)?,
        subset: joints.parse().map_err(err)?,
        dims: dims.try_into().map_err(err)?,
        ..ExtractionConfig::default()
    };
    let m = core::features::build_feature_matrix(&dataset.0, &cfg, true).map_err(err)?;
    Ok((to_rows(&m.rows), m.labels.unwrap_or_default(), m.groups))
}

/// (eigenvalues, retained component count, projected rows).
#[pyfunction]
#[pyo3(signature = (rows, variance_threshold=0.95))]
fn pca(rows: Vec<Vec<f64>>, variance_threshold: f64) -> PyResult<(Vec<f64>, usize, Vec<Vec<f64>>)> {
    let x = to_array(rows)?;
    let m = core::pca::pca_fit(x.view(), variance_threshold).map_err(err)?;
    let z = m.transform(x.view()).map_err(err)?;
    Ok((m.eigenvalues.clone(), m.retained_k, to_rows(&z)))
}

/// A fitted classifier.
#[pyclass(name = "Model", frozen)]
struct PyModel(TrainedModel);

#[pymethods]
impl PyModel {
    fn predict(&self, rows: Vec<Vec<f64>>) -> PyResult<Vec<u8>> {
        let x = to_array(rows)?;
        core::classifiers::predict(&self.0, x.view()).map_err(err)
    }

    fn to_json(&self) -> PyResult<String> {
        self.0.to_json().map_err(err)
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        TrainedModel::from_json(text).map(PyModel).map_err(err)
    }

    #[getter]
    fn family(&self) -> &'static str {
        self.0.spec.model.family_name()
    }
}

/// Trains one classifier family (tree, bagged, knn, svm-cubic, lda, mlp).
/// `params` maps hyperparameter flag names (k, hidden, ...) to values.
#[pyfunction]
#[pyo3(signature = (classifier, rows, labels, seed=42, params=None))]
fn train(
    classifier: &str,
    rows: Vec<Vec<f64>>,
    labels: Vec<u8>,
    seed: u64,
    params: Option<Vec<(String, String)>>,
) -> PyResult<PyModel> {
    let mut model = ModelSpec::from_family(classifier).map_err(err)?;
    for (k, v) in params.unwrap_or_default() {
        if !set_hyperparameter(&mut model, &k, &v).map_err(err)? {
            return Err(PyValueError::new_err(format!(
                "{k} does not apply to {classifier}"
            )));
        }
    }
    let x = to_array(rows)?;
    core::classifiers::train(&ClassifierSpec::new(model, seed), x.view(), &labels)
        .map(PyModel)
        .map_err(err)
}

/// Report JSON for a pair of label vectors.
#[pyfunction]
fn compute_report(truth: Vec<u8>, predicted: Vec<u8>) -> PyResult<String> {
    let r = core::eval::compute_report(&truth, &predicted).map_err(err)?;
    serde_json::to_string(&r).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// Parses a flat `key = value` config (empty text gives the defaults).
#[pyfunction]
#[pyo3(signature = (text=""))]
fn parse_config(text: &str) -> PyResult<String> {
    let cfg = PipelineConfig::parse_text(text).map_err(err)?;
    Ok(cfg.to_text())
}

/// Runs a full experiment; returns report JSON. Writes the bundle when
/// `output` is given.
#[pyfunction]
#[pyo3(signature = (dataset, config="", output=None))]
fn run_experiment(
    py: Python<'_>,
    dataset: &PyDataset,
    config: &str,
    output: Option<&str>,
) -> PyResult<String> {
    let cfg = PipelineConfig::parse_text(config).map_err(err)?;
    cfg.validate().map_err(err)?;
    let outcome = py
        .detach(|| core::experiment::run_experiment(&cfg, &dataset.0))
        .map_err(err)?;
    if let Some(dir) = output {
        core::experiment::write_bundle(dir.as_ref(), &cfg, &outcome).map_err(err)?;
    }
    serde_json::to_string(&outcome.report).map_err(|e| PyValueError::new_err(e.to_string()))
}

#[pymodule]
#[pyo3(name = "skelhar")]
fn skelhar(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    m.add_function(wrap_pyfunction!(extract, m)?)?;
    m.add_function(wrap_pyfunction!(pca, m)?)?;
    m.add_function(wrap_pyfunction!(train, m)?)?;
    m.add_function(wrap_pyfunction!(compute_report, m)?)?;
    m.add_function(wrap_pyfunction!(parse_config, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    Ok(())
}
