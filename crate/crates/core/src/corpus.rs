//! Tweet datasets: TSV loading with line-numbered validation, summaries,
//! serialization, and removal of duplicate/overlapping span annotations.
//!
//! Canonical file layouts (UTF-8, LF line endings, no header unless asked):
//!
//! * classification: `tweet_id<TAB>text<TAB>label`
//! * tweets only:    `tweet_id<TAB>text`
//! * spans:          `tweet_id<TAB>start<TAB>end<TAB>surface`
//!
//! Span offsets count Unicode scalar values; `end` is exclusive.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{self, BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::label::{ClassLabel, LabelScheme};
use crate::text::CharIndex;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("line {line}: expected {expected} tab-separated columns, found {found}")]
    ColumnCount {
        line: usize,
        expected: &'static str,
        found: usize,
    },
    #[error("line {line}: {message}")]
    InvalidRow { line: usize, message: String },
    #[error("line {line}: label `{label}` is not part of the {scheme} scheme")]
    UnknownLabel {
        line: usize,
        label: String,
        scheme: LabelScheme,
    },
    #[error("line {line}: duplicate tweet id `{id}` (first seen in row {first})")]
    DuplicateId { line: usize, id: String, first: usize },
    #[error("line {line}: span references unknown tweet `{id}`")]
    DanglingSpan { line: usize, id: String },
    #[error("line {line}: span {start}..{end} out of bounds for tweet `{id}` of length {len}")]
    SpanOutOfBounds {
        line: usize,
        id: String,
        start: usize,
        end: usize,
        len: usize,
    },
    #[error("line {line}: span surface `{surface}` does not match tweet text `{actual}`")]
    SurfaceMismatch {
        line: usize,
        surface: String,
        actual: String,
    },
    #[error("tweet `{id}` text contains a tab or newline and cannot be written as TSV")]
    Unserializable { id: String },
}

impl CorpusError {
    fn io(path: &Path, source: io::Error) -> Self {
        CorpusError::Io {
            path: path.display().to_string(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, CorpusError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Tweet {
    pub id: String,
    pub text: String,
}

impl Tweet {
    pub fn new(id: impl Into<String>, text: impl Into<String>) -> Self {
        Tweet {
            id: id.into(),
            text: text.into(),
        }
    }
}

/// One classification row. Unlike [`LabeledDataset`], sequences of these may
/// repeat ids (resampled training sets do).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LabeledTweet {
    pub tweet: Tweet,
    pub label: ClassLabel,
}

/// An extraction target: characters `start..end` of a tweet.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SpanAnnotation {
    pub tweet_id: String,
    pub start: usize,
    pub end: usize,
    pub surface: String,
}

impl SpanAnnotation {
    pub fn new(tweet_id: impl Into<String>, start: usize, end: usize, surface: impl Into<String>) -> Self {
        SpanAnnotation {
            tweet_id: tweet_id.into(),
            start,
            end,
            surface: surface.into(),
        }
    }

    /// Builds the span from the tweet text, taking the surface from it.
    /// Returns `None` if the range is empty or out of bounds.
    pub fn from_text(tweet_id: impl Into<String>, text: &str, start: usize, end: usize) -> Option<Self> {
        let idx = CharIndex::new(text);
        if start >= end || end > idx.char_len() {
            return None;
        }
        Some(SpanAnnotation {
            tweet_id: tweet_id.into(),
            start,
            end,
            surface: text[idx.byte_range(start, end)].to_string(),
        })
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    /// True when the two ranges share at least one character position.
    pub fn overlaps(&self, other: &SpanAnnotation) -> bool {
        self.start < other.end && other.start < self.end
    }

    /// Checks bounds and surface against the tweet text.
    pub fn validate(&self, text: &str) -> std::result::Result<(), SpanValidationError> {
        let idx = CharIndex::new(text);
        let len = idx.char_len();
        if self.start >= self.end || self.end > len {
            return Err(SpanValidationError::OutOfBounds { len });
        }
        let actual = &text[idx.byte_range(self.start, self.end)];
        if actual != self.surface {
            return Err(SpanValidationError::SurfaceMismatch {
                actual: actual.to_string(),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpanValidationError {
    #[error("span out of bounds for text of length {len}")]
    OutOfBounds { len: usize },
    #[error("surface does not match text `{actual}`")]
    SurfaceMismatch { actual: String },
}

/// Tweets with optional labels and optional span annotations.
///
/// Tweet ids are unique; every label and span refers to a loaded tweet.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    scheme: Option<LabelScheme>,
    tweets: Vec<Tweet>,
    index: HashMap<String, usize>,
    labels: HashMap<String, ClassLabel>,
    spans: Option<HashMap<String, Vec<SpanAnnotation>>>,
}

impl LabeledDataset {
    pub fn new(scheme: Option<LabelScheme>) -> Self {
        LabeledDataset {
            scheme,
            ..Default::default()
        }
    }

    /// Builds a classification dataset from rows, rejecting duplicate ids.
    pub fn from_labeled(scheme: LabelScheme, rows: impl IntoIterator<Item = LabeledTweet>) -> Result<Self> {
        let mut ds = LabeledDataset::new(Some(scheme));
        for (i, row) in rows.into_iter().enumerate() {
            ds.push(i + 1, row.tweet, Some(row.label))?;
        }
        Ok(ds)
    }

    /// Builds an unlabeled dataset, rejecting duplicate ids.
    pub fn from_tweets(tweets: impl IntoIterator<Item = Tweet>) -> Result<Self> {
        let mut ds = LabeledDataset::new(None);
        for (i, t) in tweets.into_iter().enumerate() {
            ds.push(i + 1, t, None)?;
        }
        Ok(ds)
    }

    fn push(&mut self, line: usize, tweet: Tweet, label: Option<ClassLabel>) -> Result<()> {
        if tweet.id.is_empty() {
            return Err(CorpusError::InvalidRow {
                line,
                message: "empty tweet id".into(),
            });
        }
        if let Some(&first) = self.index.get(&tweet.id) {
            return Err(CorpusError::DuplicateId {
                line,
                id: tweet.id,
                first: first + 1,
            });
        }
        if let Some(label) = label {
            match self.scheme {
                Some(s) if s.contains(label) => {}
                Some(s) => {
                    return Err(CorpusError::UnknownLabel {
                        line,
                        label: label.to_string(),
                        scheme: s,
                    })
                }
                None => self.scheme = Some(label.scheme()),
            }
            self.labels.insert(tweet.id.clone(), label);
        }
        self.index.insert(tweet.id.clone(), self.tweets.len());
        self.tweets.push(tweet);
        Ok(())
    }

    /// Attaches spans, validating each against its tweet. `line` numbers in
    /// errors are 1-based positions in `spans`.
    pub fn with_spans(mut self, spans: impl IntoIterator<Item = SpanAnnotation>) -> Result<Self> {
        let mut map: HashMap<String, Vec<SpanAnnotation>> = HashMap::new();
        for (i, span) in spans.into_iter().enumerate() {
            self.check_span(i + 1, &span)?;
            map.entry(span.tweet_id.clone()).or_default().push(span);
        }
        self.spans = Some(map);
        Ok(self)
    }

    fn check_span(&self, line: usize, span: &SpanAnnotation) -> Result<()> {
        let Some(tweet) = self.get(&span.tweet_id) else {
            return Err(CorpusError::DanglingSpan {
                line,
                id: span.tweet_id.clone(),
            });
        };
        span.validate(&tweet.text).map_err(|e| match e {
            SpanValidationError::OutOfBounds { len } => CorpusError::SpanOutOfBounds {
                line,
                id: span.tweet_id.clone(),
                start: span.start,
                end: span.end,
                len,
            },
            SpanValidationError::SurfaceMismatch { actual } => CorpusError::SurfaceMismatch {
                line,
                surface: span.surface.clone(),
                actual,
            },
        })
    }

    pub fn scheme(&self) -> Option<LabelScheme> {
        self.scheme
    }

    pub fn tweets(&self) -> &[Tweet] {
        &self.tweets
    }

    pub fn len(&self) -> usize {
        self.tweets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tweets.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&Tweet> {
        self.index.get(id).map(|&i| &self.tweets[i])
    }

    pub fn label(&self, id: &str) -> Option<ClassLabel> {
        self.labels.get(id).copied()
    }

    pub fn labels(&self) -> &HashMap<String, ClassLabel> {
        &self.labels
    }

    pub fn has_spans(&self) -> bool {
        self.spans.is_some()
    }

    /// Spans for one tweet (empty if none or if no span file was loaded).
    pub fn spans_for(&self, id: &str) -> &[SpanAnnotation] {
        self.spans
            .as_ref()
            .and_then(|m| m.get(id))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    /// All spans, grouped in tweet order and kept in load order within a tweet.
    pub fn all_spans(&self) -> Vec<SpanAnnotation> {
        self.tweets
            .iter()
            .flat_map(|t| self.spans_for(&t.id).iter().cloned())
            .collect()
    }

    /// Labeled rows in dataset order; unlabeled tweets are skipped.
    pub fn labeled_rows(&self) -> Vec<LabeledTweet> {
        self.tweets
            .iter()
            .filter_map(|t| {
                self.label(&t.id).map(|label| LabeledTweet {
                    tweet: t.clone(),
                    label,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LoadOptions {
    /// Skip the first line.
    pub header: bool,
}

fn open(path: &Path) -> Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CorpusError::io(path, e))
}

/// Iterates `(line_number, fields)` over a TSV stream, honoring `header`.
fn tsv_rows<R: BufRead>(
    reader: R,
    opts: LoadOptions,
) -> impl Iterator<Item = std::result::Result<(usize, String), (usize, io::Error)>> {
    reader
        .lines()
        .enumerate()
        .skip(usize::from(opts.header))
        .map(|(i, line)| line.map(|l| (i + 1, l)).map_err(|e| (i + 1, e)))
}

fn read_err(line: usize, e: io::Error) -> CorpusError {
    CorpusError::InvalidRow {
        line,
        message: format!("read error: {e}"),
    }
}

fn check_text(line: usize, id: &str, text: &str) -> Result<()> {
    if id.is_empty() {
        return Err(CorpusError::InvalidRow {
            line,
            message: "empty tweet id".into(),
        });
    }
    if text.is_empty() {
        return Err(CorpusError::InvalidRow {
            line,
            message: format!("tweet `{id}` has empty text"),
        });
    }
    Ok(())
}

fn parse_classification_row(line: usize, raw: &str, scheme: LabelScheme) -> Result<LabeledTweet> {
    let fields: Vec<&str> = raw.split('\t').collect();
    if fields.len() != 3 {
        return Err(CorpusError::ColumnCount {
            line,
            expected: "3",
            found: fields.len(),
        });
    }
    check_text(line, fields[0], fields[1])?;
    let label = scheme.parse_label(fields[2]).map_err(|_| CorpusError::UnknownLabel {
        line,
        label: fields[2].to_string(),
        scheme,
    })?;
    Ok(LabeledTweet {
        tweet: Tweet::new(fields[0], fields[1]),
        label,
    })
}

/// Reads `tweet_id<TAB>text<TAB>label` rows.
pub fn read_classification<R: BufRead>(reader: R, scheme: LabelScheme, opts: LoadOptions) -> Result<LabeledDataset> {
    let mut ds = LabeledDataset::new(Some(scheme));
    for row in tsv_rows(reader, opts) {
        let (line, raw) = row.map_err(|(l, e)| read_err(l, e))?;
        let r = parse_classification_row(line, &raw, scheme)?;
        ds.push(line, r.tweet, Some(r.label))?;
    }
    Ok(ds)
}

pub fn load_classification_dataset(path: &Path, scheme: LabelScheme, opts: LoadOptions) -> Result<LabeledDataset> {
    read_classification(open(path)?, scheme, opts)
}

/// Reads classification rows in which an id may repeat, as in resampled
/// training sets. Every repeat must have the same text and label as the
/// first occurrence.
pub fn read_labeled_rows<R: BufRead>(reader: R, scheme: LabelScheme, opts: LoadOptions) -> Result<Vec<LabeledTweet>> {
    let mut rows: Vec<LabeledTweet> = Vec::new();
    let mut first: HashMap<String, (usize, usize)> = HashMap::new();
    for row in tsv_rows(reader, opts) {
        let (line, raw) = row.map_err(|(l, e)| read_err(l, e))?;
        let r = parse_classification_row(line, &raw, scheme)?;
        if let Some(&(first_line, k)) = first.get(&r.tweet.id) {
            if rows[k] != r {
                return Err(CorpusError::InvalidRow {
                    line,
                    message: format!(
                        "tweet `{}` repeats with different text or label (first seen on line {first_line})",
                        r.tweet.id
                    ),
                });
            }
        } else {
            first.insert(r.tweet.id.clone(), (line, rows.len()));
        }
        rows.push(r);
    }
    Ok(rows)
}

pub fn load_labeled_rows(path: &Path, scheme: LabelScheme, opts: LoadOptions) -> Result<Vec<LabeledTweet>> {
    read_labeled_rows(open(path)?, scheme, opts)
}

/// Reads tweets from either the two-column `id<TAB>text` layout or the
/// three-column classification layout. Labels are parsed only when a scheme
/// is given; otherwise a third column is ignored.
pub fn read_tweets<R: BufRead>(reader: R, scheme: Option<LabelScheme>, opts: LoadOptions) -> Result<LabeledDataset> {
    let mut ds = LabeledDataset::new(scheme);
    for row in tsv_rows(reader, opts) {
        let (line, raw) = row.map_err(|(l, e)| read_err(l, e))?;
        let fields: Vec<&str> = raw.split('\t').collect();
        let label = match (fields.len(), scheme) {
            (2, _) => None,
            (3, Some(s)) => Some(s.parse_label(fields[2]).map_err(|_| CorpusError::UnknownLabel {
                line,
                label: fields[2].to_string(),
                scheme: s,
            })?),
            (3, None) => None,
            (n, _) => {
                return Err(CorpusError::ColumnCount {
                    line,
                    expected: "2 or 3",
                    found: n,
                })
            }
        };
        check_text(line, fields[0], fields[1])?;
        ds.push(line, Tweet::new(fields[0], fields[1]), label)?;
    }
    Ok(ds)
}

pub fn load_tweets(path: &Path, scheme: Option<LabelScheme>, opts: LoadOptions) -> Result<LabeledDataset> {
    read_tweets(open(path)?, scheme, opts)
}

/// Reads `tweet_id<TAB>start<TAB>end<TAB>surface` rows without validating
/// them against any tweet text.
pub fn read_spans<R: BufRead>(reader: R, opts: LoadOptions) -> Result<Vec<(usize, SpanAnnotation)>> {
    let mut out = Vec::new();
    for row in tsv_rows(reader, opts) {
        let (line, raw) = row.map_err(|(l, e)| read_err(l, e))?;
        let fields: Vec<&str> = raw.split('\t').collect();
        if fields.len() != 4 {
            return Err(CorpusError::ColumnCount {
                line,
                expected: "4",
                found: fields.len(),
            });
        }
        let parse = |s: &str, what: &str| {
            s.parse::<usize>().map_err(|_| CorpusError::InvalidRow {
                line,
                message: format!("{what} offset `{s}` is not a non-negative integer"),
            })
        };
        let start = parse(fields[1], "start")?;
        let end = parse(fields[2], "end")?;
        out.push((line, SpanAnnotation::new(fields[0], start, end, fields[3])));
    }
    Ok(out)
}

pub fn load_spans(path: &Path, opts: LoadOptions) -> Result<Vec<(usize, SpanAnnotation)>> {
    read_spans(open(path)?, opts)
}

/// Loads tweets plus a companion span file and validates every span against
/// its tweet (bounds, surface match, known id). Errors carry span-file line
/// numbers.
pub fn load_span_dataset(
    tweets_path: &Path,
    spans_path: &Path,
    scheme: Option<LabelScheme>,
    opts: LoadOptions,
) -> Result<LabeledDataset> {
    let ds = load_tweets(tweets_path, scheme, opts)?;
    let spans = load_spans(spans_path, opts)?;
    attach_spans(ds, spans)
}

/// Validates spans read with [`read_spans`] and attaches them.
pub fn attach_spans(mut ds: LabeledDataset, spans: Vec<(usize, SpanAnnotation)>) -> Result<LabeledDataset> {
    let mut map: HashMap<String, Vec<SpanAnnotation>> = HashMap::new();
    for (line, span) in spans {
        ds.check_span(line, &span)?;
        map.entry(span.tweet_id.clone()).or_default().push(span);
    }
    ds.spans = Some(map);
    Ok(ds)
}

fn check_writable(id: &str, text: &str) -> Result<()> {
    let bad = |s: &str| s.contains(['\t', '\n', '\r']);
    if bad(id) || bad(text) {
        return Err(CorpusError::Unserializable { id: id.to_string() });
    }
    Ok(())
}

fn write_err(e: io::Error) -> CorpusError {
    CorpusError::Io {
        path: "<output>".into(),
        source: e,
    }
}

/// Writes labeled rows in the classification layout.
pub fn write_labeled_rows<W: Write>(mut w: W, rows: &[LabeledTweet]) -> Result<()> {
    for row in rows {
        check_writable(&row.tweet.id, &row.tweet.text)?;
        writeln!(w, "{}\t{}\t{}", row.tweet.id, row.tweet.text, row.label).map_err(write_err)?;
    }
    Ok(())
}

/// Writes the tweets of a dataset: three columns when every tweet is
/// labeled, two otherwise.
pub fn write_tweets<W: Write>(mut w: W, ds: &LabeledDataset) -> Result<()> {
    let all_labeled = ds.tweets.iter().all(|t| ds.labels.contains_key(&t.id));
    for t in &ds.tweets {
        check_writable(&t.id, &t.text)?;
        match ds.label(&t.id) {
            Some(l) if all_labeled => writeln!(w, "{}\t{}\t{}", t.id, t.text, l),
            _ => writeln!(w, "{}\t{}", t.id, t.text),
        }
        .map_err(write_err)?;
    }
    Ok(())
}

pub fn write_spans<W: Write>(mut w: W, spans: &[SpanAnnotation]) -> Result<()> {
    for s in spans {
        check_writable(&s.tweet_id, &s.surface)?;
        writeln!(w, "{}\t{}\t{}\t{}", s.tweet_id, s.start, s.end, s.surface).map_err(write_err)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DatasetSummary {
    pub per_class: BTreeMap<ClassLabel, usize>,
    pub total: usize,
    pub unlabeled: usize,
    pub span_count: usize,
    pub tweets_with_spans: usize,
}

impl DatasetSummary {
    /// Key-sorted JSON object: one key per class plus `total`, and span
    /// counters when the dataset carries spans.
    pub fn to_json(&self, include_spans: bool) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (label, n) in &self.per_class {
            map.insert(label.to_string(), (*n).into());
        }
        map.insert("total".into(), self.total.into());
        if self.unlabeled > 0 {
            map.insert("unlabeled".into(), self.unlabeled.into());
        }
        if include_spans {
            map.insert("span_count".into(), self.span_count.into());
            map.insert("tweets_with_spans".into(), self.tweets_with_spans.into());
        }
        serde_json::Value::Object(map)
    }
}

/// Per-class counts (every class of the scheme, zeros included) and span
/// statistics.
pub fn summarize(ds: &LabeledDataset) -> DatasetSummary {
    let mut per_class = BTreeMap::new();
    if let Some(scheme) = ds.scheme {
        for &l in scheme.labels() {
            per_class.insert(l, 0usize);
        }
    }
    let mut unlabeled = 0;
    for t in &ds.tweets {
        match ds.label(&t.id) {
            Some(l) => *per_class.entry(l).or_insert(0) += 1,
            None => unlabeled += 1,
        }
    }
    let (span_count, tweets_with_spans) = match &ds.spans {
        Some(m) => (
            m.values().map(Vec::len).sum(),
            m.values().filter(|v| !v.is_empty()).count(),
        ),
        None => (0, 0),
    };
    DatasetSummary {
        per_class,
        total: ds.tweets.len() - unlabeled,
        unlabeled,
        span_count,
        tweets_with_spans,
    }
}

/// Removes duplicate and overlapping spans within each tweet.
///
/// Candidates are visited longest first (ties: smaller start, then
/// lexicographically smaller surface); a span is kept if it overlaps nothing
/// kept so far. Kept spans come back sorted by `(start, end)`; the removed
/// list is sorted the same way, tweet by tweet.
pub fn clean_overlapping_spans(ds: &LabeledDataset) -> (LabeledDataset, Vec<SpanAnnotation>) {
    let mut cleaned = ds.clone();
    let mut removed = Vec::new();
    let Some(spans) = &ds.spans else {
        return (cleaned, removed);
    };
    let mut out: HashMap<String, Vec<SpanAnnotation>> = HashMap::new();
    for t in &ds.tweets {
        let Some(list) = spans.get(&t.id) else { continue };
        let (kept, dropped) = resolve_overlaps(list);
        removed.extend(dropped);
        out.insert(t.id.clone(), kept);
    }
    cleaned.spans = Some(out);
    (cleaned, removed)
}

fn resolve_overlaps(spans: &[SpanAnnotation]) -> (Vec<SpanAnnotation>, Vec<SpanAnnotation>) {
    let mut order: Vec<&SpanAnnotation> = spans.iter().collect();
    order.sort_by(|a, b| {
        b.len()
            .cmp(&a.len())
            .then(a.start.cmp(&b.start))
            .then_with(|| a.surface.cmp(&b.surface))
    });
    let mut kept: Vec<SpanAnnotation> = Vec::new();
    let mut removed = Vec::new();
    for s in order {
        if kept.iter().any(|k| k.overlaps(s)) {
            removed.push(s.clone());
        } else {
            kept.push(s.clone());
        }
    }
    let key = |s: &SpanAnnotation| (s.start, s.end);
    kept.sort_by_key(key);
    removed.sort_by_key(key);
    (kept, removed)
}
