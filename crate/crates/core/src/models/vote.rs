use std::collections::BTreeSet;

use super::{ModelError, Prediction, PredictionMap};
use crate::label::LabelScheme;

/// Per tweet, the label with the most votes. Ties go to the tied label with
/// the highest mean score when every predictor supplied scores for that
/// tweet, then to scheme order. The output carries the mean scores when all
/// were available. Every predictor must cover the same tweet ids.
pub fn majority_vote(predictors: &[PredictionMap], scheme: LabelScheme) -> Result<PredictionMap, ModelError> {
    let first = predictors.first().ok_or(ModelError::NoPredictors)?;
    let ids: BTreeSet<&String> = first.keys().collect();
    for (index, p) in predictors.iter().enumerate().skip(1) {
        let other: BTreeSet<&String> = p.keys().collect();
        if other != ids {
            return Err(ModelError::CoverageMismatch {
                index,
                missing: ids.difference(&other).map(|s| s.to_string()).collect(),
                extra: other.difference(&ids).map(|s| s.to_string()).collect(),
            });
        }
    }

    let labels = scheme.labels();
    let mut out = PredictionMap::new();
    for id in ids {
        let votes: Vec<&Prediction> = predictors.iter().map(|p| &p[id]).collect();
        let mut counts = vec![0usize; labels.len()];
        for v in &votes {
            let k = scheme
                .index_of(v.label)
                .ok_or(ModelError::LabelOutsideScheme { label: v.label, scheme })?;
            counts[k] += 1;
        }
        let mean: Option<Vec<f64>> = votes
            .iter()
            .map(|v| v.scores.as_deref().filter(|s| s.len() == labels.len()))
            .collect::<Option<Vec<&[f64]>>>()
            .map(|all| {
                (0..labels.len())
                    .map(|k| all.iter().map(|s| s[k]).sum::<f64>() / all.len() as f64)
                    .collect()
            });
        let mut best = 0;
        for k in 1..labels.len() {
            let better = counts[k] > counts[best]
                || (counts[k] == counts[best] && mean.as_ref().is_some_and(|m| m[k] > m[best]));
            if better {
                best = k;
            }
        }
        out.insert(
            id.clone(),
            Prediction {
                label: labels[best],
                scores: mean,
            },
        );
    }
    Ok(out)
}
