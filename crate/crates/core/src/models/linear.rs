use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{argmax, featurize, Classifier, FeatureVector, ModelError, Prediction};
use crate::corpus::{LabeledTweet, Tweet};
use crate::label::{ClassLabel, LabelScheme};
use crate::resample::SeededRng;
use crate::tokenize::{encode, BpeVocab, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub learning_rate: f64,
    pub l2: f64,
    pub seed: u64,
    pub feature_dim: usize,
    pub batch_size: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 5,
            learning_rate: 0.1,
            l2: 1e-4,
            seed: 0,
            feature_dim: 1 << 16,
            batch_size: 16,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        let bad = |m: String| Err(ModelError::InvalidConfig(m));
        if self.epochs == 0 {
            return bad("epochs must be at least 1".into());
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return bad(format!("learning_rate must be positive, got {}", self.learning_rate));
        }
        if !(self.l2.is_finite() && self.l2 >= 0.0) {
            return bad(format!("l2 must be non-negative, got {}", self.l2));
        }
        if self.learning_rate * self.l2 >= 1.0 {
            return bad("learning_rate × l2 must be below 1".into());
        }
        if !self.feature_dim.is_power_of_two() || !(1 << 8..=1 << 22).contains(&self.feature_dim) {
            return bad(format!(
                "feature_dim must be a power of two in [256, 4194304], got {}",
                self.feature_dim
            ));
        }
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1".into());
        }
        Ok(())
    }
}

/// Multinomial logistic regression over hashed features. `weights` is
/// row-major, one row of `feature_dim` per class in scheme order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub scheme: LabelScheme,
    pub feature_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl LinearModel {
    pub fn zeros(scheme: LabelScheme, feature_dim: usize) -> Self {
        let k = scheme.num_classes();
        LinearModel {
            scheme,
            feature_dim,
            weights: vec![0.0; k * feature_dim],
            bias: vec![0.0; k],
        }
    }

    pub fn num_classes(&self) -> usize {
        self.bias.len()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.bias).all(|w| w.is_finite())
    }

    /// Softmax class probabilities in scheme order.
    pub fn probabilities(&self, x: &FeatureVector) -> Result<Vec<f64>, ModelError> {
        if x.dim != self.feature_dim {
            return Err(ModelError::DimensionMismatch {
                expected: self.feature_dim,
                found: x.dim,
            });
        }
        let mut z = logits(&self.weights, &self.bias, 1.0, self.feature_dim, x);
        softmax(&mut z);
        Ok(z)
    }

    pub fn predict_features(&self, x: &FeatureVector) -> Result<(ClassLabel, Vec<f64>), ModelError> {
        let p = self.probabilities(x)?;
        Ok((self.scheme.labels()[argmax(&p)], p))
    }
}

fn logits(weights: &[f64], bias: &[f64], scale: f64, dim: usize, x: &FeatureVector) -> Vec<f64> {
    (0..bias.len())
        .map(|c| {
            let row = &weights[c * dim..(c + 1) * dim];
            scale * x.entries.iter().map(|&(i, v)| row[i] * v).sum::<f64>() + bias[c]
        })
        .collect()
}

fn softmax(z: &mut [f64]) {
    let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for v in z.iter_mut() {
        *v = (*v - m).exp();
        total += *v;
    }
    for v in z.iter_mut() {
        *v /= total;
    }
}

/// Mean softmax cross-entropy over `examples` plus `l2 / 2 · ‖weights‖²`
/// (bias unregularized), with its gradient in the same layout as the
/// parameters. Returns `(loss, d_weights, d_bias)`.
pub fn objective(
    weights: &[f64],
    bias: &[f64],
    feature_dim: usize,
    examples: &[(FeatureVector, usize)],
    l2: f64,
) -> (f64, Vec<f64>, Vec<f64>) {
    let n = examples.len().max(1) as f64;
    let mut loss = 0.0;
    let mut gw: Vec<f64> = weights.iter().map(|w| l2 * w).collect();
    let mut gb = vec![0.0; bias.len()];
    for (x, y) in examples {
        let mut p = logits(weights, bias, 1.0, feature_dim, x);
        softmax(&mut p);
        loss -= p[*y].ln() / n;
        for (c, &pc) in p.iter().enumerate() {
            let delta = (pc - if c == *y { 1.0 } else { 0.0 }) / n;
            gb[c] += delta;
            for &(i, v) in &x.entries {
                gw[c * feature_dim + i] += delta * v;
            }
        }
    }
    loss += 0.5 * l2 * weights.iter().map(|w| w * w).sum::<f64>();
    (loss, gw, gb)
}

fn class_index(scheme: LabelScheme, label: ClassLabel) -> Result<usize, ModelError> {
    scheme
        .index_of(label)
        .ok_or(ModelError::LabelOutsideScheme { label, scheme })
}

/// Mini-batch gradient descent on [`objective`]. Each epoch visits the rows
/// in an order shuffled by a generator seeded once with `config.seed`.
/// Weight decay is applied through a running scale factor so each step only
/// touches the features present in the batch.
pub fn train_classifier(
    rows: &[LabeledTweet],
    scheme: LabelScheme,
    vocab: &BpeVocab,
    config: &TrainConfig,
) -> Result<LinearModel, ModelError> {
    config.validate()?;
    if rows.is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let classes: BTreeSet<ClassLabel> = rows.iter().map(|r| r.label).collect();
    if classes.len() < 2 {
        return Err(ModelError::SingleClass(rows[0].label));
    }
    let mut examples = Vec::with_capacity(rows.len());
    for r in rows {
        let y = class_index(scheme, r.label)?;
        let seq = encode(&r.tweet.text, vocab)?;
        examples.push((featurize(&seq, config.feature_dim), y));
    }

    let dim = config.feature_dim;
    let mut model = LinearModel::zeros(scheme, dim);
    let mut scale = 1.0;
    let decay = 1.0 - config.learning_rate * config.l2;
    let mut rng = SeededRng::new(config.seed);
    let mut order: Vec<usize> = (0..examples.len()).collect();
    let mut updates: Vec<(usize, f64)> = Vec::new();
    for _ in 0..config.epochs {
        rng.shuffle(&mut order);
        for batch in order.chunks(config.batch_size) {
            let n = batch.len() as f64;
            let mut gb = vec![0.0; model.num_classes()];
            updates.clear();
            for &e in batch {
                let (x, y) = &examples[e];
                let mut p = logits(&model.weights, &model.bias, scale, dim, x);
                softmax(&mut p);
                for (c, &pc) in p.iter().enumerate() {
                    let delta = (pc - if c == *y { 1.0 } else { 0.0 }) / n;
                    gb[c] += delta;
                    updates.extend(x.entries.iter().map(|&(i, v)| (c * dim + i, delta * v)));
                }
            }
            scale *= decay;
            for &(j, g) in &updates {
                model.weights[j] -= config.learning_rate * g / scale;
            }
            for (b, g) in model.bias.iter_mut().zip(&gb) {
                *b -= config.learning_rate * g;
            }
            if scale < 1e-6 {
                model.weights.iter_mut().for_each(|w| *w *= scale);
                scale = 1.0;
            }
        }
    }
    model.weights.iter_mut().for_each(|w| *w *= scale);
    Ok(model)
}

/// Softmax scores and argmax label (ties to the earlier label in scheme order).
pub fn predict_label(model: &LinearModel, seq: &TokenSequence) -> (ClassLabel, Vec<f64>) {
    model
        .predict_features(&featurize(seq, model.feature_dim))
        .expect("features built at the model's dimension")
}

/// A [`LinearModel`] bundled with the vocabulary it was trained on.
#[derive(Debug, Clone)]
pub struct BaselineClassifier {
    pub model: LinearModel,
    pub vocab: BpeVocab,
    pub config: TrainConfig,
}

impl BaselineClassifier {
    pub fn train(
        rows: &[LabeledTweet],
        scheme: LabelScheme,
        vocab: BpeVocab,
        config: TrainConfig,
    ) -> Result<Self, ModelError> {
        let model = train_classifier(rows, scheme, &vocab, &config)?;
        Ok(BaselineClassifier { model, vocab, config })
    }
}

impl Classifier for BaselineClassifier {
    fn scheme(&self) -> LabelScheme {
        self.model.scheme
    }

    fn predict(&self, tweet: &Tweet) -> Result<Prediction, ModelError> {
        let seq = encode(&tweet.text, &self.vocab)?;
        let (label, scores) = predict_label(&self.model, &seq);
        Ok(Prediction {
            label,
            scores: Some(scores),
        })
    }
}
