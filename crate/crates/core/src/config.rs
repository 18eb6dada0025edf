//! Experiment configuration and its flat `key = value` text form.
//!
//! Keys mirror the CLI flag names (without the leading dashes), so a config
//! file and a command line are interchangeable; flags are applied after the
//! file and win. Blank lines and `#` comments are ignored.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassifierSpec, ModelSpec};
use crate::error::{HarError, Result};
use crate::eval::{SplitPlan, Stratify};
use crate::features::{Dims, ExtractionConfig, FrameWindow, JointSubset, Modality};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PcaSettings {
    pub enabled: bool,
    pub variance_threshold: f64,
}

impl Default for PcaSettings {
    fn default() -> Self {
        PcaSettings {
            enabled: false,
            variance_threshold: 0.95,
        }
    }
}

impl PcaSettings {
    pub fn threshold(&self) -> Option<f64> {
        self.enabled.then_some(self.variance_threshold)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub extraction: ExtractionConfig,
    pub pca: PcaSettings,
    pub classifier: ClassifierSpec,
    pub split: SplitPlan,
    pub folds: usize,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 42;

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            extraction: ExtractionConfig::default(),
            pca: PcaSettings::default(),
            classifier: ClassifierSpec::new(ModelSpec::fine_knn(), DEFAULT_SEED),
            split: SplitPlan {
                seed: DEFAULT_SEED,
                ..SplitPlan::default()
            },
            folds: 5,
            seed: DEFAULT_SEED,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| HarError::Config(format!("invalid value {value:?} for {key}")))
}

fn parse_on_off(key: &str, value: &str) -> Result<bool> {
    match value {
        "on" => Ok(true),
        "off" => Ok(false),
        _ => Err(HarError::Config(format!(
            "{key} must be on or off, got {value:?}"
        ))),
    }
}

/// Accepts fractions ("0.6,0.2,0.2") or percentages ("60,20,20").
fn parse_split(value: &str) -> Result<[f64; 3]> {
    let parts: Vec<f64> = value
        .split(',')
        .map(|p| parse::<f64>("split", p.trim()))
        .collect::<Result<_>>()?;
    let [a, b, c] = parts[..] else {
        return Err(HarError::Config(format!(
            "split needs three values, got {value:?}"
        )));
    };
    let sum = a + b + c;
    if (sum - 100.0).abs() < 1e-6 {
        Ok([a / 100.0, b / 100.0, c / 100.0])
    } else {
        Ok([a, b, c])
    }
}

fn parse_frames(value: &str) -> Result<FrameWindow> {
    if value == "centered" {
        return Ok(FrameWindow::Centered);
    }
    value
        .split(',')
        .map(|p| parse::<usize>("frames", p.trim()))
        .collect::<Result<Vec<_>>>()
        .map(FrameWindow::Explicit)
}

/// Hyperparameter keys accepted by each family.
pub fn hyperparameter_keys(model: &ModelSpec) -> &'static [&'static str] {
    match model {
        ModelSpec::FineTree { .. } => &["max-splits"],
        ModelSpec::BaggedTrees { .. } => &["n-trees", "max-splits"],
        ModelSpec::FineKnn { .. } => &["k"],
        ModelSpec::CubicSvm { .. } => &["c", "tolerance"],
        ModelSpec::LinearDiscriminant => &[],
        ModelSpec::Mlp { .. } => &["hidden", "epochs", "lr", "batch"],
    }
}

pub const HYPERPARAMETER_KEYS: [&str; 9] = [
    "max-splits",
    "n-trees",
    "k",
    "c",
    "tolerance",
    "hidden",
    "epochs",
    "lr",
    "batch",
];

/// Sets one hyperparameter. Returns false when `key` does not belong to the
/// model's family.
pub fn set_hyperparameter(model: &mut ModelSpec, key: &str, value: &str) -> Result<bool> {
    match (model, key) {
        (
            ModelSpec::FineTree { max_splits } | ModelSpec::BaggedTrees { max_splits, .. },
            "max-splits",
        ) => *max_splits = parse(key, value)?,
        (ModelSpec::BaggedTrees { n_trees, .. }, "n-trees") => *n_trees = parse(key, value)?,
        (ModelSpec::FineKnn { k }, "k") => *k = parse(key, value)?,
        (ModelSpec::CubicSvm { c, .. }, "c") => *c = parse(key, value)?,
        (ModelSpec::CubicSvm { tolerance, .. }, "tolerance") => *tolerance = parse(key, value)?,
        (ModelSpec::Mlp { hidden_width, .. }, "hidden") => *hidden_width = parse(key, value)?,
        (ModelSpec::Mlp { epochs, .. }, "epochs") => *epochs = parse(key, value)?,
        (ModelSpec::Mlp { learning_rate, .. }, "lr") => *learning_rate = parse(key, value)?,
        (ModelSpec::Mlp { batch_size, .. }, "batch") => *batch_size = parse(key, value)?,
        _ => return Ok(false),
    }
    Ok(true)
}

fn hyperparameter_values(model: &ModelSpec) -> Vec<(&'static str, String)> {
    match *model {
        ModelSpec::FineTree { max_splits } => vec![("max-splits", max_splits.to_string())],
        ModelSpec::BaggedTrees {
            n_trees,
            max_splits,
        } => vec![
            ("n-trees", n_trees.to_string()),
            ("max-splits", max_splits.to_string()),
        ],
        ModelSpec::FineKnn { k } => vec![("k", k.to_string())],
        ModelSpec::CubicSvm { c, tolerance } => {
            vec![("c", c.to_string()), ("tolerance", tolerance.to_string())]
        }
        ModelSpec::LinearDiscriminant => vec![],
        ModelSpec::Mlp {
            hidden_width,
            epochs,
            learning_rate,
            batch_size,
        } => vec![
            ("hidden", hidden_width.to_string()),
            ("epochs", epochs.to_string()),
            ("lr", learning_rate.to_string()),
            ("batch", batch_size.to_string()),
        ],
    }
}

impl PipelineConfig {
    /// Applies `(key, value)` pairs in order, except that `classifier` is
    /// applied first (it resets hyperparameters to the family defaults) and
    /// `seed` before the derived per-component seeds.
    pub fn apply<'a>(&mut self, pairs: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<()> {
        let pairs: Vec<(&str, &str)> = pairs.into_iter().collect();
        let rank = |k: &str| match k {
            "classifier" => 0,
            "seed" => 1,
            _ => 2,
        };
        let mut ordered = pairs.clone();
        ordered.sort_by_key(|(k, _)| rank(k));
        for (k, v) in ordered {
            self.set(k, v.trim())?;
        }
        Ok(())
    }

    /// Sets one key. Unknown keys, and hyperparameters that do not belong to
    /// the selected classifier, are errors.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "modality" => self.extraction.modality = value.parse::<Modality>()?,
            "joints" => self.extraction.subset = value.parse::<JointSubset>()?,
            "dims" => self.extraction.dims = value.parse::<Dims>()?,
            "frames" => self.extraction.window = parse_frames(value)?,
            "pca" => self.pca.enabled = parse_on_off(key, value)?,
            "pca-var" => self.pca.variance_threshold = parse(key, value)?,
            "classifier" => self.classifier.model = ModelSpec::from_family(value)?,
            "split" => {
                let [a, b, c] = parse_split(value)?;
                self.split.train_frac = a;
                self.split.test_frac = b;
                self.split.validation_frac = c;
            }
            "stratify" => self.split.stratify_by = value.parse::<Stratify>()?,
            "folds" => self.folds = parse(key, value)?,
            "seed" => {
                self.seed = parse(key, value)?;
                self.classifier.seed = self.seed;
                self.split.seed = self.seed;
            }
            "classifier-seed" => self.classifier.seed = parse(key, value)?,
            "split-seed" => self.split.seed = parse(key, value)?,
            _ if HYPERPARAMETER_KEYS.contains(&key) => {
                if !set_hyperparameter(&mut self.classifier.model, key, value)? {
                    return Err(HarError::Config(format!(
                        "{key} does not apply to classifier {}",
                        self.classifier.model
                    )));
                }
            }
            _ => return Err(HarError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.classifier.model.validate()?;
        self.split.validate()?;
        if self.folds < 2 {
            return Err(HarError::Config("folds must be >= 2".into()));
        }
        let t = self.pca.variance_threshold;
        if !(t > 0.0 && t <= 1.0) {
            return Err(HarError::Config(format!(
                "pca-var must lie in (0, 1], got {t}"
            )));
        }
        if let FrameWindow::Explicit(p) = &self.extraction.window {
            if p.len() != crate::features::WINDOW_FRAMES || p.windows(2).any(|w| w[0] >= w[1]) {
                return Err(HarError::Config(format!(
                    "frames must list {} strictly increasing positions",
                    crate::features::WINDOW_FRAMES
                )));
            }
        }
        Ok(())
    }

    pub fn parse_text(text: &str) -> Result<PipelineConfig> {
        let mut pairs = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| HarError::Parse {
                line: n as u64 + 1,
                message: format!("expected key = value, found {line:?}"),
            })?;
            pairs.push((k.trim(), v.trim()));
        }
        let mut cfg = PipelineConfig::default();
        cfg.apply(pairs)?;
        Ok(cfg)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: &dyn std::fmt::Display| {
            let _ = writeln!(out, "{k} = {v}");
        };
        line("modality", &self.extraction.modality);
        line("joints", &self.extraction.subset);
        line("dims", &self.extraction.dims);
        match &self.extraction.window {
            FrameWindow::Centered => line("frames", &"centered"),
            FrameWindow::Explicit(p) => {
                let s: Vec<String> = p.iter().map(|v| v.to_string()).collect();
                line("frames", &s.join(","))
            }
        }
        line("pca", &if self.pca.enabled { "on" } else { "off" });
        line("pca-var", &self.pca.variance_threshold);
        line("classifier", &self.classifier.model);
        for (k, v) in hyperparameter_values(&self.classifier.model) {
            line(k, &v);
        }
        line(
            "split",
            &format!(
                "{},{},{}",
                self.split.train_frac, self.split.test_frac, self.split.validation_frac
            ),
        );
        line("stratify", &self.split.stratify_by);
        line("folds", &self.folds);
        line("seed", &self.seed);
        if self.classifier.seed != self.seed {
            line("classifier-seed", &self.classifier.seed);
        }
        if self.split.seed != self.seed {
            line("split-seed", &self.split.seed);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = PipelineConfig::default();
        assert_eq!(PipelineConfig::parse_text(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn classifier_applied_before_hyperparameters() {
        let c = PipelineConfig::parse_text("hidden = 175\nclassifier = mlp\n# comment\n").unwrap();
        assert!(matches!(
            c.classifier.model,
            ModelSpec::Mlp {
                hidden_width: 175,
                ..
            }
        ));
    }

    #[test]
    fn percent_split_and_seed_propagation() {
        let c = PipelineConfig::parse_text("split = 70,10,20\nseed = 7").unwrap();
        assert_eq!(c.split.train_frac, 0.7);
        assert_eq!((c.classifier.seed, c.split.seed), (7, 7));
    }

    #[test]
    fn rejects_unknown_and_mismatched_keys() {
        assert!(PipelineConfig::parse_text("colour = red").is_err());
        assert!(PipelineConfig::parse_text("classifier = tree\nk = 3").is_err());
        assert!(PipelineConfig::parse_text("no equals sign").is_err());
        assert!(PipelineConfig::parse_text("joints = c10").is_err());
    }
}
