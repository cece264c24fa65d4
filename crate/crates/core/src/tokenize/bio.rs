use std::fmt;

use serde::{Deserialize, Serialize};

use super::{TokenSequence, TokenizeError};
use crate::corpus::SpanAnnotation;
use crate::text::CharIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BioTag {
    B,
    I,
    O,
}

impl BioTag {
    pub const ALL: [BioTag; 3] = [BioTag::B, BioTag::I, BioTag::O];

    pub fn index(self) -> usize {
        match self {
            BioTag::B => 0,
            BioTag::I => 1,
            BioTag::O => 2,
        }
    }
}

impl fmt::Display for BioTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BioTag::B => "B",
            BioTag::I => "I",
            BioTag::O => "O",
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BioTags(pub Vec<BioTag>);

impl BioTags {
    /// No `I` at the start or right after an `O`.
    pub fn is_well_formed(&self) -> bool {
        let mut prev = BioTag::O;
        for &t in &self.0 {
            if t == BioTag::I && prev == BioTag::O {
                return false;
            }
            prev = t;
        }
        true
    }

    /// Promotes every orphan `I` to `B`.
    pub fn repaired(&self) -> BioTags {
        let mut prev = BioTag::O;
        BioTags(
            self.0
                .iter()
                .map(|&t| {
                    let t = if t == BioTag::I && prev == BioTag::O {
                        BioTag::B
                    } else {
                        t
                    };
                    prev = t;
                    t
                })
                .collect(),
        )
    }

    /// Maximal `B I*` runs as token index ranges. Orphan `I`s start a run.
    pub fn runs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        let mut open: Option<usize> = None;
        for (i, &t) in self.0.iter().enumerate() {
            match t {
                BioTag::B => {
                    if let Some(s) = open.take() {
                        out.push((s, i));
                    }
                    open = Some(i);
                }
                BioTag::I => {
                    if open.is_none() {
                        open = Some(i);
                    }
                }
                BioTag::O => {
                    if let Some(s) = open.take() {
                        out.push((s, i));
                    }
                }
            }
        }
        if let Some(s) = open {
            out.push((s, self.0.len()));
        }
        out
    }
}

/// Tags tokens from character spans: a token is inside a span when its byte
/// range overlaps the span's byte range. The first token of a span gets `B`
/// and the rest `I`. A token straddling two adjacent spans stays with the
/// first one.
pub fn align_spans_to_bio(seq: &TokenSequence, spans: &[SpanAnnotation], text: &str) -> Result<BioTags, TokenizeError> {
    let idx = CharIndex::new(text);
    let mut ranges: Vec<(usize, usize)> = Vec::with_capacity(spans.len());
    for s in spans {
        if s.start >= s.end || s.end > idx.char_len() {
            return Err(TokenizeError::SpanOutOfBounds {
                start: s.start,
                end: s.end,
                len: idx.char_len(),
            });
        }
        ranges.push((s.start, s.end));
    }
    ranges.sort_unstable();
    for w in ranges.windows(2) {
        if w[1].0 < w[0].1 {
            return Err(TokenizeError::OverlappingSpans {
                first: w[0],
                second: w[1],
            });
        }
    }

    let mut tags = vec![BioTag::O; seq.len()];
    let mut taken = vec![false; seq.len()];
    for (start, end) in ranges {
        let bytes = idx.byte_range(start, end);
        let mut first = true;
        for (k, &(ts, te)) in seq.offsets.iter().enumerate() {
            if ts < bytes.end && bytes.start < te && !taken[k] {
                tags[k] = if first { BioTag::B } else { BioTag::I };
                taken[k] = true;
                first = false;
            }
        }
    }
    Ok(BioTags(tags))
}
