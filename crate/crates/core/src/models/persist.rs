//! JSON model files.
//!
//! Both kinds share an envelope: `format` names the model kind, `version` is
//! the layout version (currently 1), `tool_version` the writing crate's
//! version, `config` the training config. The vocabulary travels with the
//! model (`entries` as `[token, id]` pairs sorted by id, `merges` in rank
//! order) so a model file is self-contained.
//!
//! * `tweetade-linear-classifier`: `model` holds `scheme`, `feature_dim`,
//!   row-major `weights` (classes × feature_dim) and `bias`.
//! * `tweetade-perceptron-tagger`: `model.weights` maps feature keys to
//!   `[B, I, O]` weights.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{BaselineClassifier, BaselineTagger, LinearModel, ModelError, PerceptronTagger, TaggerConfig, TrainConfig};
use crate::tokenize::BpeVocab;
use crate::TOOL_VERSION;

const CLASSIFIER_FORMAT: &str = "tweetade-linear-classifier";
const TAGGER_FORMAT: &str = "tweetade-perceptron-tagger";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct VocabBlob {
    entries: Vec<(String, u32)>,
    merges: Vec<(String, String)>,
}

impl VocabBlob {
    fn of(vocab: &BpeVocab) -> Self {
        VocabBlob {
            entries: vocab.entries().into_iter().map(|(t, i)| (t.to_string(), i)).collect(),
            merges: vocab.merges().to_vec(),
        }
    }

    fn into_vocab(self) -> Result<BpeVocab, ModelError> {
        Ok(BpeVocab::from_parts(self.entries, self.merges)?)
    }
}

#[derive(Serialize, Deserialize)]
struct Envelope<C, M> {
    format: String,
    version: u32,
    tool_version: String,
    config: C,
    model: M,
    vocab: VocabBlob,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), ModelError> {
    let mut text = serde_json::to_string(value).map_err(|e| ModelError::Persist(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn read_envelope<C, M>(path: &Path, format: &str) -> Result<Envelope<C, M>, ModelError>
where
    C: for<'de> Deserialize<'de>,
    M: for<'de> Deserialize<'de>,
{
    let text = fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.display().to_string(),
        source,
    })?;
    #[derive(Deserialize)]
    struct Header {
        format: String,
        version: u32,
    }
    let header: Header = serde_json::from_str(&text).map_err(|e| ModelError::Persist(e.to_string()))?;
    if header.format != format {
        return Err(ModelError::Persist(format!(
            "expected a `{format}` file, found `{}`",
            header.format
        )));
    }
    if header.version != VERSION {
        return Err(ModelError::Persist(format!("unsupported version {}", header.version)));
    }
    serde_json::from_str(&text).map_err(|e| ModelError::Persist(e.to_string()))
}

pub fn save_classifier(path: &Path, c: &BaselineClassifier) -> Result<(), ModelError> {
    write_json(
        path,
        &Envelope {
            format: CLASSIFIER_FORMAT.into(),
            version: VERSION,
            tool_version: TOOL_VERSION.into(),
            config: c.config,
            model: &c.model,
            vocab: VocabBlob::of(&c.vocab),
        },
    )
}

pub fn load_classifier(path: &Path) -> Result<BaselineClassifier, ModelError> {
    let env: Envelope<TrainConfig, LinearModel> = read_envelope(path, CLASSIFIER_FORMAT)?;
    let m = &env.model;
    let k = m.scheme.num_classes();
    if m.bias.len() != k || m.weights.len() != k * m.feature_dim || !m.feature_dim.is_power_of_two() {
        return Err(ModelError::Persist(
            "weight shape does not match scheme and feature_dim".into(),
        ));
    }
    if !m.is_finite() {
        return Err(ModelError::Persist("non-finite weights".into()));
    }
    Ok(BaselineClassifier {
        model: env.model,
        vocab: env.vocab.into_vocab()?,
        config: env.config,
    })
}

pub fn save_tagger(path: &Path, t: &BaselineTagger) -> Result<(), ModelError> {
    write_json(
        path,
        &Envelope {
            format: TAGGER_FORMAT.into(),
            version: VERSION,
            tool_version: TOOL_VERSION.into(),
            config: t.config,
            model: &t.tagger,
            vocab: VocabBlob::of(&t.vocab),
        },
    )
}

pub fn load_tagger(path: &Path) -> Result<BaselineTagger, ModelError> {
    let env: Envelope<TaggerConfig, PerceptronTagger> = read_envelope(path, TAGGER_FORMAT)?;
    if !env.model.is_finite() {
        return Err(ModelError::Persist("non-finite weights".into()));
    }
    Ok(BaselineTagger {
        tagger: env.model,
        vocab: env.vocab.into_vocab()?,
        config: env.config,
    })
}
