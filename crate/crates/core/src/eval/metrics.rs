//! Confusion matrix and per-class metrics.

use std::fmt::Write as _;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{HarError, Result};
use crate::skeleton::{ActivityClass, ActivityKind};

pub const N_CLASSES: usize = 9;

/// sensitivity / (1 - specificity). Zero false positives give `Infinite`,
/// serialized as the string "inf"; `Undefined` (no positives or no
/// negatives in the evaluation set) is serialized as null.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LikelihoodRatio {
    Finite(f64),
    Infinite,
    Undefined,
}

impl Serialize for LikelihoodRatio {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            LikelihoodRatio::Finite(v) => s.serialize_f64(*v),
            LikelihoodRatio::Infinite => s.serialize_str("inf"),
            LikelihoodRatio::Undefined => s.serialize_none(),
        }
    }
}

impl<'de> Deserialize<'de> for LikelihoodRatio {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Option::<Repr>::deserialize(d)? {
            None => Ok(LikelihoodRatio::Undefined),
            Some(Repr::Num(v)) => Ok(LikelihoodRatio::Finite(v)),
            Some(Repr::Text(t)) if t == "inf" => Ok(LikelihoodRatio::Infinite),
            Some(Repr::Text(t)) => Err(serde::de::Error::custom(format!(
                "unexpected likelihood ratio {t:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: u8,
    pub support: u64,
    pub recall: Option<f64>,
    pub precision: Option<f64>,
    pub positive_likelihood_ratio: LikelihoodRatio,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupAccuracy {
    pub stationary: Option<f64>,
    pub dynamic: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// Which rows produced the numbers (e.g. "cross-validation", "validation").
    pub protocol: String,
    /// Rows are true classes 1..=9, columns predicted classes.
    pub confusion: [[u64; N_CLASSES]; N_CLASSES],
    pub overall_accuracy: f64,
    pub per_class: Vec<ClassMetrics>,
    pub group_accuracy: GroupAccuracy,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fold_accuracies: Option<Vec<f64>>,
}

fn ratio(num: u64, den: u64) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

fn label_index(l: u8) -> Result<usize> {
    ActivityClass::from_label(l)
        .map(|c| usize::from(c.label()) - 1)
        .ok_or(HarError::InvalidLabel(i64::from(l)))
}

pub fn compute_report(truth: &[u8], predicted: &[u8]) -> Result<EvalReport> {
    if truth.len() != predicted.len() {
        return Err(HarError::DimensionMismatch {
            expected: truth.len(),
            actual: predicted.len(),
        });
    }
    if truth.is_empty() {
        return Err(HarError::Config("cannot report on zero rows".into()));
    }
    let mut confusion = [[0u64; N_CLASSES]; N_CLASSES];
    for (&t, &p) in truth.iter().zip(predicted) {
        confusion[label_index(t)?][label_index(p)?] += 1;
    }
    Ok(report_from_confusion(confusion))
}

pub fn report_from_confusion(confusion: [[u64; N_CLASSES]; N_CLASSES]) -> EvalReport {
    let total: u64 = confusion.iter().flatten().sum();
    let trace: u64 = (0..N_CLASSES).map(|i| confusion[i][i]).sum();

    let per_class = (0..N_CLASSES)
        .map(|c| {
            let tp = confusion[c][c];
            let support: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
            let fp = predicted - tp;
            let negatives = total - support;
            let plr = if support == 0 || negatives == 0 {
                LikelihoodRatio::Undefined
            } else if fp == 0 {
                LikelihoodRatio::Infinite
            } else {
                let sensitivity = tp as f64 / support as f64;
                let fpr = fp as f64 / negatives as f64;
                LikelihoodRatio::Finite(sensitivity / fpr)
            };
            ClassMetrics {
                label: c as u8 + 1,
                support,
                recall: ratio(tp, support),
                precision: ratio(tp, predicted),
                positive_likelihood_ratio: plr,
            }
        })
        .collect();

    let group = |kind: ActivityKind| {
        let (mut hit, mut n) = (0, 0);
        for c in ActivityClass::ALL.iter().filter(|c| c.kind() == kind) {
            let i = usize::from(c.label()) - 1;
            hit += confusion[i][i];
            n += confusion[i].iter().sum::<u64>();
        }
        ratio(hit, n)
    };

    EvalReport {
        protocol: String::new(),
        confusion,
        overall_accuracy: ratio(trace, total).unwrap_or(0.0),
        per_class,
        group_accuracy: GroupAccuracy {
            stationary: group(ActivityKind::Stationary),
            dynamic: group(ActivityKind::Dynamic),
        },
        fold_accuracies: None,
    }
}

impl EvalReport {
    /// 10×10 CSV: header row of predicted labels, first column of true labels.
    pub fn confusion_csv(&self) -> String {
        let mut out = String::from("true\\predicted");
        for c in 1..=N_CLASSES {
            let _ = write!(out, ",{c}");
        }
        out.push('\n');
        for (i, row) in self.confusion.iter().enumerate() {
            let _ = write!(out, "{}", i + 1);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}
