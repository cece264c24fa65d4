use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{ConfusionCounts, EvalError, MetricsReport, ReportRow, ReportTask};
use crate::corpus::SpanAnnotation;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpanMatchMode {
    /// Boundaries must be identical.
    Strict,
    /// At least one shared character.
    Relaxed,
}

impl SpanMatchMode {
    fn matches(self, pred: (usize, usize), gold: (usize, usize)) -> bool {
        match self {
            SpanMatchMode::Strict => pred == gold,
            SpanMatchMode::Relaxed => pred.0 < gold.1 && gold.0 < pred.1,
        }
    }
}

impl fmt::Display for SpanMatchMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpanMatchMode::Strict => "strict",
            SpanMatchMode::Relaxed => "relaxed",
        })
    }
}

impl FromStr for SpanMatchMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "strict" => Ok(SpanMatchMode::Strict),
            "relaxed" => Ok(SpanMatchMode::Relaxed),
            _ => Err(format!("unknown span match mode `{s}` (expected strict or relaxed)")),
        }
    }
}

/// Greedy one-to-one matching within one tweet. Predictions are
/// deduplicated and visited in `(start, end)` order; each takes the first
/// unmatched gold span (also in `(start, end)` order) it matches.
pub fn match_spans(gold: &[(usize, usize)], pred: &[(usize, usize)], mode: SpanMatchMode) -> ConfusionCounts {
    let mut gold: Vec<(usize, usize)> = gold.to_vec();
    gold.sort_unstable();
    let mut pred: Vec<(usize, usize)> = pred.to_vec();
    pred.sort_unstable();
    pred.dedup();
    let mut used = vec![false; gold.len()];
    let mut tp = 0;
    for &p in &pred {
        if let Some(k) = (0..gold.len()).find(|&k| !used[k] && mode.matches(p, gold[k])) {
            used[k] = true;
            tp += 1;
        }
    }
    ConfusionCounts::new(tp, pred.len() as u64 - tp, gold.len() as u64 - tp)
}

type SpansById<'a> = BTreeMap<&'a str, Vec<(usize, usize)>>;

fn group(spans: &[SpanAnnotation]) -> Result<SpansById<'_>, EvalError> {
    let mut out = SpansById::new();
    for s in spans {
        if s.start >= s.end {
            return Err(EvalError::InvalidSpan {
                tweet_id: s.tweet_id.clone(),
                start: s.start,
                end: s.end,
            });
        }
        out.entry(s.tweet_id.as_str()).or_default().push((s.start, s.end));
    }
    Ok(out)
}

/// Micro-averaged span extraction scores over all tweets that appear in
/// either list.
pub fn score_spans(
    gold: &[SpanAnnotation],
    pred: &[SpanAnnotation],
    mode: SpanMatchMode,
) -> Result<MetricsReport, EvalError> {
    let gold = group(gold)?;
    let pred = group(pred)?;
    let mut ids: Vec<&str> = gold.keys().chain(pred.keys()).copied().collect();
    ids.sort_unstable();
    ids.dedup();
    let empty = Vec::new();
    let total = ids
        .into_iter()
        .map(|id| match_spans(gold.get(id).unwrap_or(&empty), pred.get(id).unwrap_or(&empty), mode))
        .fold(ConfusionCounts::default(), |acc, c| acc.merge(&c));
    Ok(MetricsReport {
        task: ReportTask::Spans { mode },
        rows: vec![ReportRow::from_counts("micro", total)],
        focus: Some("micro".into()),
    })
}
