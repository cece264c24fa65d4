use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{display, ClassMetrics, ConfusionCounts, EvalError, SpanMatchMode};
use crate::label::LabelScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReportTask {
    Classification { scheme: LabelScheme },
    Spans { mode: SpanMatchMode },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub label: String,
    /// Absent on aggregated rows, whose metrics are not derived from counts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counts: Option<ConfusionCounts>,
    pub metrics: ClassMetrics,
}

impl ReportRow {
    pub fn from_counts(label: &str, counts: ConfusionCounts) -> Self {
        ReportRow {
            label: label.to_string(),
            metrics: counts.metrics(),
            counts: Some(counts),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub task: ReportTask,
    pub rows: Vec<ReportRow>,
    /// Label of the row a leaderboard reports.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub focus: Option<String>,
}

impl MetricsReport {
    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn headline(&self) -> Option<&ReportRow> {
        self.focus.as_deref().and_then(|f| self.row(f))
    }

    /// Every row with counts has metrics equal to those recomputed from them.
    pub fn is_consistent(&self) -> bool {
        self.rows.iter().all(|r| match &r.counts {
            Some(c) => c.metrics() == r.metrics,
            None => true,
        })
    }

    /// Fixed-width table: counts, then P/R to 3 decimals and F1 to 2.
    pub fn to_table(&self) -> String {
        let width = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(5).max(5);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>7}  {:>7}  {:>7}  {:>9}  {:>9}  {:>6}",
            "label", "tp", "fp", "fn", "precision", "recall", "f1"
        );
        for r in &self.rows {
            let (tp, fp, fn_) = match &r.counts {
                Some(c) => (c.tp.to_string(), c.fp.to_string(), c.fn_.to_string()),
                None => ("-".into(), "-".into(), "-".into()),
            };
            let mark = if self.focus.as_deref() == Some(r.label.as_str()) {
                " *"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "{:<width$}  {:>7}  {:>7}  {:>7}  {:>9}  {:>9}  {:>6}{mark}",
                r.label,
                tp,
                fp,
                fn_,
                display(r.metrics.precision, 3),
                display(r.metrics.recall, 3),
                display(r.metrics.f1, 2),
            );
        }
        out
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Element-wise median of precision, recall and F1 across reports of the
/// same shape (task and row labels). Metrics are taken as stored, not
/// recomputed from counts; counts are dropped from the result unless there
/// is a single report.
pub fn median_aggregate(reports: &[MetricsReport]) -> Result<MetricsReport, EvalError> {
    let first = reports.first().ok_or(EvalError::NoReports)?;
    if reports.len() == 1 {
        return Ok(first.clone());
    }
    for (i, r) in reports.iter().enumerate().skip(1) {
        let same = r.task == first.task
            && r.rows.len() == first.rows.len()
            && r.rows.iter().zip(&first.rows).all(|(a, b)| a.label == b.label);
        if !same {
            return Err(EvalError::ShapeMismatch { index: i });
        }
    }
    let rows = first
        .rows
        .iter()
        .enumerate()
        .map(|(k, row)| {
            let col = |f: fn(&ClassMetrics) -> f64| {
                let mut v: Vec<f64> = reports.iter().map(|r| f(&r.rows[k].metrics)).collect();
                median(&mut v)
            };
            ReportRow {
                label: row.label.clone(),
                counts: None,
                metrics: ClassMetrics {
                    precision: col(|m| m.precision),
                    recall: col(|m| m.recall),
                    f1: col(|m| m.f1),
                },
            }
        })
        .collect();
    Ok(MetricsReport {
        task: first.task,
        rows,
        focus: first.focus.clone(),
    })
}
