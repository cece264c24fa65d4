//! GPT-2 style byte-level BPE with byte offsets, and span → BIO alignment.
//!
//! Encoding: split the text with the GPT-2 word pattern, map each piece's
//! UTF-8 bytes to printable characters, then repeatedly merge the adjacent
//! pair with the lowest merge rank (leftmost on ties) until no ranked pair
//! remains. No special tokens are added.

mod bio;
mod bytes;
mod vocab;

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use fancy_regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bio::{align_spans_to_bio, BioTag, BioTags};
pub use bytes::ByteEncoder;
pub use vocab::{load_vocab, BpeVocab};

#[derive(Debug, Error)]
pub enum TokenizeError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("vocab file: {0}")]
    VocabFormat(String),
    #[error("vocab: duplicate token `{0}`")]
    DuplicateToken(String),
    #[error("vocab: id {id} assigned to both `{first}` and `{second}`")]
    IdCollision { id: u32, first: String, second: String },
    #[error("merges line {line}: expected two space-separated symbols, got `{content}`")]
    MalformedMerge { line: usize, content: String },
    #[error("merges line {line}: duplicate merge `{left} {right}`")]
    DuplicateMerge { line: usize, left: String, right: String },
    #[error("symbol `{symbol}` (from piece `{piece}`) is not in the vocabulary")]
    UnknownSymbol { symbol: String, piece: String },
    #[error("token id {0} is not in the vocabulary")]
    UnknownId(u32),
    #[error("token `{0}` contains characters outside the byte alphabet")]
    NotByteLevel(String),
    #[error("decoded bytes are not valid UTF-8")]
    InvalidUtf8,
    #[error("spans {first:?} and {second:?} overlap")]
    OverlappingSpans {
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("span {start}..{end} is out of bounds for a text of {len} characters")]
    SpanOutOfBounds { start: usize, end: usize, len: usize },
    #[error("pre-tokenizer: {0}")]
    Pattern(String),
}

/// Token ids with the UTF-8 byte range each token covers.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TokenSequence {
    pub ids: Vec<u32>,
    pub offsets: Vec<(usize, usize)>,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Offsets are contiguous from 0 to `byte_len`.
    pub fn tiles(&self, byte_len: usize) -> bool {
        let mut pos = 0;
        for &(s, e) in &self.offsets {
            if s != pos || e <= s {
                return false;
            }
            pos = e;
        }
        pos == byte_len && self.ids.len() == self.offsets.len()
    }
}

const GPT2_PATTERN: &str = r"'s|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+";

fn pre_tokenizer() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(GPT2_PATTERN).expect("GPT-2 pattern compiles"))
}

/// Splits text into GPT-2 pre-tokenization pieces, as byte ranges.
pub fn pre_tokenize(text: &str) -> Result<Vec<(usize, usize)>, TokenizeError> {
    pre_tokenizer()
        .find_iter(text)
        .map(|m| {
            m.map(|m| (m.start(), m.end()))
                .map_err(|e| TokenizeError::Pattern(e.to_string()))
        })
        .collect()
}

/// Runs the merge loop over one piece of byte-level symbols. Returns the
/// final symbols with their start index into `symbols`' concatenation
/// (one character per byte).
pub fn merge_symbols(vocab: &BpeVocab, symbols: Vec<String>) -> Vec<(String, usize)> {
    let n = symbols.len();
    if n < 2 {
        return symbols.into_iter().enumerate().map(|(i, s)| (s, i)).collect();
    }
    let mut sym: Vec<Option<String>> = symbols.into_iter().map(Some).collect();
    let mut next: Vec<Option<usize>> = (0..n).map(|i| (i + 1 < n).then_some(i + 1)).collect();
    let mut prev: Vec<Option<usize>> = (0..n).map(|i| i.checked_sub(1)).collect();
    let mut version = vec![0u32; n];
    // min-heap on (rank, left position); stale entries are skipped on pop
    // (rank, left, left version, right, right version)
    type Candidate = (usize, usize, u32, usize, u32);
    let mut heap: BinaryHeap<Reverse<Candidate>> = BinaryHeap::new();

    let push = |heap: &mut BinaryHeap<_>, sym: &[Option<String>], version: &[u32], l: usize, r: usize| {
        if let (Some(a), Some(b)) = (&sym[l], &sym[r]) {
            if let Some(rank) = vocab.merge_rank(a, b) {
                heap.push(Reverse((rank, l, version[l], r, version[r])));
            }
        }
    };
    for i in 0..n - 1 {
        push(&mut heap, &sym, &version, i, i + 1);
    }
    while let Some(Reverse((_, l, vl, r, vr))) = heap.pop() {
        if version[l] != vl || version[r] != vr || next[l] != Some(r) || sym[l].is_none() || sym[r].is_none() {
            continue;
        }
        let right = sym[r].take().unwrap();
        sym[l].as_mut().unwrap().push_str(&right);
        version[l] += 1;
        version[r] += 1;
        next[l] = next[r];
        if let Some(nr) = next[r] {
            prev[nr] = Some(l);
        }
        if let Some(p) = prev[l] {
            push(&mut heap, &sym, &version, p, l);
        }
        if let Some(nr) = next[l] {
            push(&mut heap, &sym, &version, l, nr);
        }
    }
    let mut out = Vec::new();
    let mut cur = Some(0);
    while let Some(i) = cur {
        out.push((sym[i].take().unwrap(), i));
        cur = next[i];
    }
    out
}

/// Encodes text into BPE token ids with byte offsets.
pub fn encode(text: &str, vocab: &BpeVocab) -> Result<TokenSequence, TokenizeError> {
    let enc = ByteEncoder::global();
    let mut seq = TokenSequence::default();
    for (start, end) in pre_tokenize(text)? {
        let piece = &text.as_bytes()[start..end];
        let symbols: Vec<String> = piece.iter().map(|&b| enc.encode_byte(b).to_string()).collect();
        let merged = merge_symbols(vocab, symbols);
        for (k, (symbol, offset)) in merged.iter().enumerate() {
            let Some(id) = vocab.token_id(symbol) else {
                return Err(TokenizeError::UnknownSymbol {
                    symbol: symbol.clone(),
                    piece: text[start..end].to_string(),
                });
            };
            let tok_end = merged.get(k + 1).map_or(piece.len(), |(_, o)| *o);
            seq.ids.push(id);
            seq.offsets.push((start + offset, start + tok_end));
        }
    }
    Ok(seq)
}

/// Inverse of [`encode`].
pub fn decode(ids: &[u32], vocab: &BpeVocab) -> Result<String, TokenizeError> {
    let enc = ByteEncoder::global();
    let mut bytes = Vec::new();
    for &id in ids {
        let token = vocab.token(id).ok_or(TokenizeError::UnknownId(id))?;
        let b = enc
            .decode(token)
            .ok_or_else(|| TokenizeError::NotByteLevel(token.to_string()))?;
        bytes.extend(b);
    }
    String::from_utf8(bytes).map_err(|_| TokenizeError::InvalidUtf8)
}
