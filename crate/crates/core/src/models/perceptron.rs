use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{ModelError, Tagger};
use crate::corpus::{LabeledDataset, SpanAnnotation, Tweet};
use crate::resample::SeededRng;
use crate::text::CharIndex;
use crate::tokenize::{align_spans_to_bio, encode, BioTag, BioTags, BpeVocab, TokenSequence};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct TaggerConfig {
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TaggerConfig {
    fn default() -> Self {
        TaggerConfig { epochs: 5, seed: 0 }
    }
}

impl TaggerConfig {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.epochs == 0 {
            return Err(ModelError::InvalidConfig("epochs must be at least 1".into()));
        }
        Ok(())
    }
}

// Feature keys: kind in the high bits, value below. Ids are u32, so values
// at or above 2^32 are free for sentinels.
const BIAS: u64 = 0;
const CUR: u64 = 1 << 40;
const PREV: u64 = 2 << 40;
const NEXT: u64 = 3 << 40;
const PREV_TAG: u64 = 4 << 40;
const BOUNDARY: u64 = 1 << 32;
const START_TAG: u64 = 3;

/// Decoding scans tags in this order and keeps the first maximum, so an
/// untrained model predicts all-`O`.
const DECODE_ORDER: [BioTag; 3] = [BioTag::O, BioTag::B, BioTag::I];

fn features(ids: &[u32], i: usize, prev_tag: Option<BioTag>) -> [u64; 5] {
    let prev = if i == 0 { BOUNDARY } else { u64::from(ids[i - 1]) };
    let next = ids.get(i + 1).map_or(BOUNDARY, |&x| u64::from(x));
    let tag = prev_tag.map_or(START_TAG, |t| t.index() as u64);
    [BIAS, CUR | u64::from(ids[i]), PREV | prev, NEXT | next, PREV_TAG | tag]
}

/// Greedy left-to-right token tagger with per-feature weights for B, I, O
/// (indexed by [`BioTag::index`]).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PerceptronTagger {
    pub weights: BTreeMap<u64, [f64; 3]>,
}

fn decode_with(weights: &BTreeMap<u64, [f64; 3]>, ids: &[u32]) -> Vec<BioTag> {
    let mut tags = Vec::with_capacity(ids.len());
    for i in 0..ids.len() {
        let mut score = [0.0; 3];
        for f in features(ids, i, tags.last().copied()) {
            if let Some(w) = weights.get(&f) {
                for k in 0..3 {
                    score[k] += w[k];
                }
            }
        }
        let mut best = DECODE_ORDER[0];
        for &t in &DECODE_ORDER[1..] {
            if score[t.index()] > score[best.index()] {
                best = t;
            }
        }
        tags.push(best);
    }
    tags
}

impl PerceptronTagger {
    pub fn tag(&self, seq: &TokenSequence) -> BioTags {
        BioTags(decode_with(&self.weights, &seq.ids))
    }

    pub fn is_finite(&self) -> bool {
        self.weights.values().flatten().all(|w| w.is_finite())
    }
}

/// Weight with the running sum needed for averaging, updated lazily.
#[derive(Default, Clone, Copy)]
struct Averaged {
    w: [f64; 3],
    total: [f64; 3],
    stamp: [u64; 3],
}

fn update(
    params: &mut BTreeMap<u64, Averaged>,
    current: &mut BTreeMap<u64, [f64; 3]>,
    clock: u64,
    f: u64,
    k: usize,
    delta: f64,
) {
    let p = params.entry(f).or_default();
    p.total[k] += (clock - p.stamp[k]) as f64 * p.w[k];
    p.stamp[k] = clock;
    p.w[k] += delta;
    current.entry(f).or_default()[k] = p.w[k];
}

/// Structured perceptron with greedy decoding: each sentence is decoded with
/// the current weights and, if any tag is wrong, gold features are rewarded
/// and predicted features penalized. The result averages the weights over
/// every sentence visit. Sentence order is reshuffled each epoch from a
/// generator seeded once with `config.seed`.
pub fn train_tagger(
    dataset: &LabeledDataset,
    vocab: &BpeVocab,
    config: &TaggerConfig,
) -> Result<PerceptronTagger, ModelError> {
    config.validate()?;
    if dataset.all_spans().is_empty() {
        return Err(ModelError::EmptyDataset);
    }
    let mut data: Vec<(Vec<u32>, Vec<BioTag>)> = Vec::with_capacity(dataset.len());
    for tweet in dataset.tweets() {
        let seq = encode(&tweet.text, vocab)?;
        let tags = align_spans_to_bio(&seq, dataset.spans_for(&tweet.id), &tweet.text)?;
        data.push((seq.ids, tags.0));
    }

    let mut params: BTreeMap<u64, Averaged> = BTreeMap::new();
    let mut current: BTreeMap<u64, [f64; 3]> = BTreeMap::new();
    let mut clock: u64 = 1;
    let mut rng = SeededRng::new(config.seed);
    let mut order: Vec<usize> = (0..data.len()).collect();
    for _ in 0..config.epochs {
        rng.shuffle(&mut order);
        for &s in &order {
            let (ids, gold) = &data[s];
            let pred = decode_with(&current, ids);
            if pred != *gold {
                for i in 0..ids.len() {
                    let gold_prev = i.checked_sub(1).map(|j| gold[j]);
                    let pred_prev = i.checked_sub(1).map(|j| pred[j]);
                    if gold[i] == pred[i] && gold_prev == pred_prev {
                        continue;
                    }
                    for f in features(ids, i, gold_prev) {
                        update(&mut params, &mut current, clock, f, gold[i].index(), 1.0);
                    }
                    for f in features(ids, i, pred_prev) {
                        update(&mut params, &mut current, clock, f, pred[i].index(), -1.0);
                    }
                }
            }
            clock += 1;
        }
    }

    let weights = params
        .into_iter()
        .map(|(f, p)| {
            let avg = std::array::from_fn(|k| (p.total[k] + (clock - p.stamp[k]) as f64 * p.w[k]) / clock as f64);
            (f, avg)
        })
        .filter(|(_, w)| w.iter().any(|&x| x != 0.0))
        .collect();
    Ok(PerceptronTagger { weights })
}

/// Converts token tags into character spans: orphan `I`s become `B`, each
/// maximal `B I*` run covers the bytes of its tokens, byte bounds are widened
/// to whole characters, and surrounding whitespace is trimmed. A span that
/// would overlap the previous one starts where that one ends; spans left
/// empty are dropped.
pub fn spans_from_tags(tags: &BioTags, seq: &TokenSequence, tweet: &Tweet) -> Vec<SpanAnnotation> {
    let idx = CharIndex::new(&tweet.text);
    let chars: Vec<char> = tweet.text.chars().collect();
    let mut out: Vec<SpanAnnotation> = Vec::new();
    for (s, e) in tags.repaired().runs() {
        let mut start = idx.char_floor(seq.offsets[s].0);
        let mut end = idx.char_ceil(seq.offsets[e - 1].1);
        if let Some(prev) = out.last() {
            start = start.max(prev.end);
        }
        while start < end && chars[start].is_whitespace() {
            start += 1;
        }
        while end > start && chars[end - 1].is_whitespace() {
            end -= 1;
        }
        if let Some(span) = SpanAnnotation::from_text(tweet.id.clone(), &tweet.text, start, end) {
            out.push(span);
        }
    }
    out
}

/// Tags `seq` (the encoding of `tweet`) and converts the result to spans.
pub fn extract_spans(tagger: &PerceptronTagger, seq: &TokenSequence, tweet: &Tweet) -> Vec<SpanAnnotation> {
    spans_from_tags(&tagger.tag(seq), seq, tweet)
}

/// A [`PerceptronTagger`] bundled with the vocabulary it was trained on.
#[derive(Debug, Clone)]
pub struct BaselineTagger {
    pub tagger: PerceptronTagger,
    pub vocab: BpeVocab,
    pub config: TaggerConfig,
}

impl BaselineTagger {
    pub fn train(dataset: &LabeledDataset, vocab: BpeVocab, config: TaggerConfig) -> Result<Self, ModelError> {
        let tagger = train_tagger(dataset, &vocab, &config)?;
        Ok(BaselineTagger { tagger, vocab, config })
    }
}

impl Tagger for BaselineTagger {
    fn extract(&self, tweet: &Tweet) -> Result<Vec<SpanAnnotation>, ModelError> {
        let seq = encode(&tweet.text, &self.vocab)?;
        Ok(extract_spans(&self.tagger, &seq, tweet))
    }
}
