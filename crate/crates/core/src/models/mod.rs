//! Classifier and tagger interfaces, linear baselines, prediction-file
//! replay and majority voting.
//!
//! Neural systems plug in either by implementing [`Classifier`] / [`Tagger`]
//! or by writing prediction files that [`FileClassifier`] / [`FileTagger`]
//! replay.

mod features;
mod file;
mod linear;
mod perceptron;
mod persist;
mod vote;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use features::{featurize, mix64, FeatureVector};
pub use file::{read_predictions, write_predictions, FileClassifier, FileTagger, PredictionMap};
pub use linear::{objective, predict_label, train_classifier, BaselineClassifier, LinearModel, TrainConfig};
pub use perceptron::{extract_spans, spans_from_tags, train_tagger, BaselineTagger, PerceptronTagger, TaggerConfig};
pub use persist::{load_classifier, load_tagger, save_classifier, save_tagger};
pub use vote::majority_vote;

use crate::corpus::{SpanAnnotation, Tweet};
use crate::label::{ClassLabel, LabelScheme};
use crate::tokenize::TokenizeError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Tokenize(#[from] TokenizeError),
    #[error("training data is empty")]
    EmptyDataset,
    #[error("training data has a single class ({0}); at least two are needed")]
    SingleClass(ClassLabel),
    #[error("label {label} is not part of the {scheme} scheme")]
    LabelOutsideScheme { label: ClassLabel, scheme: LabelScheme },
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("feature dimension mismatch: model has {expected}, input has {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("no prediction for tweet `{0}`")]
    MissingPrediction(String),
    #[error("line {line}: {message}")]
    PredictionFormat { line: usize, message: String },
    #[error("line {line}: duplicate prediction for tweet `{id}`")]
    DuplicatePrediction { line: usize, id: String },
    #[error("predictor {index} covers different tweets: missing {missing:?}, extra {extra:?}")]
    CoverageMismatch {
        index: usize,
        missing: Vec<String>,
        extra: Vec<String>,
    },
    #[error("no predictors to combine")]
    NoPredictors,
    #[error("invalid span for tweet `{tweet_id}`: {message}")]
    InvalidSpan { tweet_id: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("model file: {0}")]
    Persist(String),
}

/// A predicted label with optional per-class scores in scheme order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: ClassLabel,
    pub scores: Option<Vec<f64>>,
}

/// Tweet → label. Implementations must be pure so batches can fan out.
pub trait Classifier: Send + Sync {
    fn scheme(&self) -> LabelScheme;
    fn predict(&self, tweet: &Tweet) -> Result<Prediction, ModelError>;
}

/// Tweet → character spans, valid on the tweet and mutually non-overlapping.
pub trait Tagger: Send + Sync {
    fn extract(&self, tweet: &Tweet) -> Result<Vec<SpanAnnotation>, ModelError>;
}

/// Index of the largest score; ties go to the earliest (scheme order).
pub(crate) fn argmax(scores: &[f64]) -> usize {
    let mut best = 0;
    for (k, &s) in scores.iter().enumerate().skip(1) {
        if s > scores[best] {
            best = k;
        }
    }
    best
}
