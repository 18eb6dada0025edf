//! Splitting, cross-validation and report metrics.

mod cv;
mod metrics;
mod split;

pub use cv::{
    cross_validate, cross_validate_with_assignment, fit_pipeline, CvOptions, FittedPipeline,
};
pub use metrics::{
    compute_report, report_from_confusion, ClassMetrics, EvalReport, GroupAccuracy,
    LikelihoodRatio, N_CLASSES,
};
pub use split::{fold_assignment, split, SplitIndices, SplitPlan, Stratify};
