//! Non-neural toolkit for mining adverse drug effect (ADE) mentions from tweets.
//!
//! The crate covers the full data path around a classify-then-extract system:
//!
//! * [`corpus`]: loading, validating, summarizing and cleaning tweet datasets.
//! * [`normalize`]: mention/URL/emoji normalization with offset tracking.
//! * [`tokenize`]: GPT-2 style byte-level BPE and span-to-BIO alignment.
//! * [`resample`]: seeded random over/undersampling for class imbalance.
//! * [`models`]: classifier/tagger interfaces, linear baselines, file replay and voting.
//! * [`pipeline`]: classify each tweet, tag only the ADE-positive ones.
//! * [`eval`]: precision/recall/F1, strict and relaxed span scoring, median rows.

pub mod corpus;
pub mod eval;
pub mod label;
pub mod models;
pub mod normalize;
pub mod pipeline;
pub mod resample;
pub mod text;
pub mod tokenize;

pub use corpus::{LabeledDataset, LabeledTweet, SpanAnnotation, Tweet};
pub use label::{ClassLabel, LabelScheme};

/// Version string embedded in reports and persisted models.
pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
