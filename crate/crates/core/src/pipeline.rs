//! Classify-then-extract: every tweet is classified, and only tweets
//! classified ADE are passed to the span tagger.
//!
//! With a normalization config, both models see the normalized text and
//! the tagger's spans are projected back to the original tweet; spans that
//! touch rewritten text cannot be projected and are dropped (and counted).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{SpanAnnotation, Tweet};
use crate::label::{ClassLabel, LabelScheme};
use crate::models::{Classifier, ModelError, Tagger};
use crate::normalize::{ConfigError, NormalizationConfig, Normalizer, Projection};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("the pipeline needs a binary-ADE classifier, got {0}")]
    NotBinary(LabelScheme),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("tweet `{tweet_id}`: classifier: {source}")]
    Classifier {
        tweet_id: String,
        #[source]
        source: ModelError,
    },
    #[error("tweet `{tweet_id}`: tagger: {source}")]
    Tagger {
        tweet_id: String,
        #[source]
        source: ModelError,
    },
    #[error("tweet `{tweet_id}`: tagger returned an invalid span: {message}")]
    BadSpan { tweet_id: String, message: String },
    #[error("worker pool: {0}")]
    Pool(String),
}

impl PipelineError {
    fn tweet_id(&self) -> Option<&str> {
        match self {
            PipelineError::Classifier { tweet_id, .. }
            | PipelineError::Tagger { tweet_id, .. }
            | PipelineError::BadSpan { tweet_id, .. } => Some(tweet_id),
            _ => None,
        }
    }
}

/// Result for one tweet. NoADE records never carry spans; an ADE record may
/// have none if the tagger found nothing or every span was dropped.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdeExtraction {
    pub tweet_id: String,
    pub label: ClassLabel,
    pub spans: Vec<SpanAnnotation>,
}

/// One tweet's extraction plus the number of spans lost in projection.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    pub extraction: AdeExtraction,
    pub dropped: usize,
}

fn check_spans(tweet: &Tweet, spans: &mut [SpanAnnotation]) -> Result<(), PipelineError> {
    spans.sort_by_key(|s| (s.start, s.end));
    for (k, s) in spans.iter().enumerate() {
        let bad = |message: String| PipelineError::BadSpan {
            tweet_id: tweet.id.clone(),
            message,
        };
        if s.tweet_id != tweet.id {
            return Err(bad(format!("span belongs to tweet `{}`", s.tweet_id)));
        }
        s.validate(&tweet.text).map_err(|e| bad(e.to_string()))?;
        if k > 0 && spans[k - 1].end > s.start {
            return Err(bad(format!("{}..{} overlaps the previous span", s.start, s.end)));
        }
    }
    Ok(())
}

/// Runs one tweet through the classifier and, if it is ADE, the tagger.
pub fn extract_ades(
    tweet: &Tweet,
    classifier: &dyn Classifier,
    tagger: &dyn Tagger,
    normalizer: Option<&Normalizer<'_>>,
) -> Result<Extracted, PipelineError> {
    if classifier.scheme() != LabelScheme::BinaryAde {
        return Err(PipelineError::NotBinary(classifier.scheme()));
    }
    let normalized = normalizer.map(|n| n.normalize(tweet));
    let input = normalized.as_ref().map_or_else(|| tweet.clone(), |n| n.as_tweet());
    let label = classifier
        .predict(&input)
        .map_err(|source| PipelineError::Classifier {
            tweet_id: tweet.id.clone(),
            source,
        })?
        .label;
    let mut extracted = Extracted {
        extraction: AdeExtraction {
            tweet_id: tweet.id.clone(),
            label,
            spans: Vec::new(),
        },
        dropped: 0,
    };
    if label != ClassLabel::Ade {
        return Ok(extracted);
    }
    let mut spans = tagger.extract(&input).map_err(|source| PipelineError::Tagger {
        tweet_id: tweet.id.clone(),
        source,
    })?;
    check_spans(&input, &mut spans)?;
    if let Some(n) = &normalized {
        let back = n.offset_map.inverted();
        let mut kept = Vec::with_capacity(spans.len());
        for s in &spans {
            match back.project_span(s) {
                Projection::Kept(p) => kept.push(p),
                Projection::Dropped { .. } => extracted.dropped += 1,
            }
        }
        spans = kept;
    }
    extracted.extraction.spans = spans;
    Ok(extracted)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BatchOptions {
    /// Record per-tweet failures and continue instead of aborting.
    pub lenient: bool,
    /// Worker threads; 0 lets the pool decide.
    pub jobs: usize,
}

impl Default for BatchOptions {
    fn default() -> Self {
        BatchOptions {
            lenient: false,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetFailure {
    pub tweet_id: String,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub tweets: usize,
    #[serde(rename = "ADE")]
    pub ade: usize,
    #[serde(rename = "NoADE")]
    pub no_ade: usize,
    pub spans_emitted: usize,
    pub spans_dropped: usize,
    pub errors: Vec<TweetFailure>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BatchOutput {
    /// In input order; tweets that failed in lenient mode are absent.
    pub records: Vec<AdeExtraction>,
    pub report: RunReport,
}

/// Applies [`extract_ades`] to every tweet. Work may run on several threads
/// but records come back in input order. In strict mode the first failing
/// tweet (in input order) aborts the batch.
pub fn run_batch(
    tweets: &[Tweet],
    classifier: &dyn Classifier,
    tagger: &dyn Tagger,
    preprocess: Option<&NormalizationConfig>,
    options: BatchOptions,
) -> Result<BatchOutput, PipelineError> {
    if classifier.scheme() != LabelScheme::BinaryAde {
        return Err(PipelineError::NotBinary(classifier.scheme()));
    }
    let normalizer = preprocess.map(|c| Normalizer::new(c.clone())).transpose()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(options.jobs)
        .build()
        .map_err(|e| PipelineError::Pool(e.to_string()))?;
    let results: Vec<Result<Extracted, PipelineError>> = pool.install(|| {
        tweets
            .par_iter()
            .map(|t| extract_ades(t, classifier, tagger, normalizer.as_ref()))
            .collect()
    });

    let mut out = BatchOutput {
        records: Vec::with_capacity(tweets.len()),
        report: RunReport {
            tweets: tweets.len(),
            ..Default::default()
        },
    };
    for r in results {
        match r {
            Ok(e) => {
                match e.extraction.label {
                    ClassLabel::Ade => out.report.ade += 1,
                    _ => out.report.no_ade += 1,
                }
                out.report.spans_emitted += e.extraction.spans.len();
                out.report.spans_dropped += e.dropped;
                out.records.push(e.extraction);
            }
            Err(e) if options.lenient && e.tweet_id().is_some() => {
                out.report.errors.push(TweetFailure {
                    tweet_id: e.tweet_id().unwrap_or_default().to_string(),
                    message: e.to_string(),
                });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}
