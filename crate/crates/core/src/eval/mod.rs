//! Shared-task scoring.
//!
//! Precision = tp / (tp + fp), recall = tp / (tp + fn), F1 = harmonic mean
//! of the two; each is 0 when its denominator is 0. Classification is scored
//! one-vs-rest per class; spans are matched one-to-one per tweet under strict
//! (identical boundaries) or relaxed (at least one shared character) rules
//! and micro-averaged.

mod report;
mod spans;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use report::{median_aggregate, MetricsReport, ReportRow, ReportTask};
pub use spans::{match_spans, score_spans, SpanMatchMode};

use crate::label::{ClassLabel, LabelScheme};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("gold and prediction ids differ: missing from predictions {missing:?}, not in gold {extra:?}")]
    IdMismatch { missing: Vec<String>, extra: Vec<String> },
    #[error("label {label} is not part of the {scheme} scheme")]
    LabelOutsideScheme { label: ClassLabel, scheme: LabelScheme },
    #[error("invalid span {start}..{end} for tweet `{tweet_id}`")]
    InvalidSpan { tweet_id: String, start: usize, end: usize },
    #[error("cannot aggregate an empty list of reports")]
    NoReports,
    #[error("report {index} has a different shape than the first report")]
    ShapeMismatch { index: usize },
}

/// Tallies for one class (or for all spans).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tn: Option<u64>,
}

impl ConfusionCounts {
    pub fn new(tp: u64, fp: u64, fn_: u64) -> Self {
        ConfusionCounts { tp, fp, fn_, tn: None }
    }

    pub fn precision(&self) -> f64 {
        precision(self)
    }

    pub fn recall(&self) -> f64 {
        recall(self)
    }

    pub fn metrics(&self) -> ClassMetrics {
        ClassMetrics::from_counts(self)
    }

    /// Adds `other` (tn is kept only if both sides carry it).
    pub fn merge(&self, other: &ConfusionCounts) -> ConfusionCounts {
        ConfusionCounts {
            tp: self.tp + other.tp,
            fp: self.fp + other.fp,
            fn_: self.fn_ + other.fn_,
            tn: self.tn.zip(other.tn).map(|(a, b)| a + b),
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn precision(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fp)
}

pub fn recall(c: &ConfusionCounts) -> f64 {
    ratio(c.tp, c.tp + c.fn_)
}

pub fn f1(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

impl ClassMetrics {
    pub fn from_counts(c: &ConfusionCounts) -> Self {
        let p = precision(c);
        let r = recall(c);
        ClassMetrics {
            precision: p,
            recall: r,
            f1: f1(p, r),
        }
    }
}

/// `x` rounded half-up to `decimals` places, as an integer count of units in
/// the last place (0.6113 at 2 decimals → 61). A 1e-9 nudge keeps ties that
/// are not exactly representable (0.975) rounding up.
pub fn display_units(x: f64, decimals: u32) -> i64 {
    let scale = 10f64.powi(decimals as i32);
    (x * scale + 0.5 + 1e-9).floor() as i64
}

/// `x` formatted half-up with a fixed number of decimals.
pub fn display(x: f64, decimals: u32) -> String {
    let units = display_units(x, decimals);
    let scale = 10i64.pow(decimals);
    if decimals == 0 {
        return units.to_string();
    }
    let sign = if units < 0 { "-" } else { "" };
    let u = units.abs();
    format!("{sign}{}.{:0width$}", u / scale, u % scale, width = decimals as usize)
}

/// Gold/predicted label per tweet id.
pub type LabelMap = BTreeMap<String, ClassLabel>;

fn check_ids<A, B>(gold: &BTreeMap<String, A>, pred: &BTreeMap<String, B>) -> Result<(), EvalError> {
    let g: BTreeSet<&String> = gold.keys().collect();
    let p: BTreeSet<&String> = pred.keys().collect();
    if g == p {
        return Ok(());
    }
    Err(EvalError::IdMismatch {
        missing: g.difference(&p).map(|s| s.to_string()).collect(),
        extra: p.difference(&g).map(|s| s.to_string()).collect(),
    })
}

/// Per-class one-vs-rest counts and metrics, rows in scheme order.
pub fn score_classification(gold: &LabelMap, pred: &LabelMap, scheme: LabelScheme) -> Result<MetricsReport, EvalError> {
    check_ids(gold, pred)?;
    for &label in gold.values().chain(pred.values()) {
        if !scheme.contains(label) {
            return Err(EvalError::LabelOutsideScheme { label, scheme });
        }
    }
    let rows = scheme
        .labels()
        .iter()
        .map(|&class| {
            let mut c = ConfusionCounts {
                tn: Some(0),
                ..Default::default()
            };
            for (id, &g) in gold {
                let p = pred[id];
                match (g == class, p == class) {
                    (true, true) => c.tp += 1,
                    (false, true) => c.fp += 1,
                    (true, false) => c.fn_ += 1,
                    (false, false) => *c.tn.as_mut().unwrap() += 1,
                }
            }
            ReportRow::from_counts(class.as_str(), c)
        })
        .collect();
    Ok(MetricsReport {
        task: ReportTask::Classification { scheme },
        rows,
        focus: scheme.focus_class().map(|l| l.to_string()),
    })
}
