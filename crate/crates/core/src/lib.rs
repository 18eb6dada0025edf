//! Skeleton-based human activity recognition.
//!
//! The pipeline takes streams of 28 tracked body joints per frame, turns a
//! fixed window of frames into head-relative, scale-normalized posture
//! vectors (or world-frame velocities / accelerations), optionally reduces
//! them with PCA, and benchmarks six classical classifiers under a
//! stratified split plus S-fold cross-validation protocol.
//!
//! Module map:
//!
//! - [`skeleton`]: joints, frames, activity classes and sequences
//! - [`dataset`]: CSV ingest/emit and the synthetic motion generator
//! - [`features`]: frame selection, modality derivation, posture normalization
//! - [`pca`]: explained-variance PCA
//! - [`classifiers`]: tree, bagged trees, k-NN, cubic SVM, LDA, MLP
//! - [`eval`]: splitting, cross-validation and report metrics
//! - [`config`] / [`experiment`]: the reproducible experiment harness

pub mod classifiers;
pub mod config;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod experiment;
pub mod features;
pub mod pca;
pub mod rng;
pub mod skeleton;

pub use error::{HarError, Result};
