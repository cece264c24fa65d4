//! Offset maps between an original text and its rewritten form.

use serde::{Deserialize, Serialize};

use crate::corpus::SpanAnnotation;
use crate::text::CharIndex;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    /// Copied verbatim; source and target substrings are equal.
    Preserved,
    /// Substituted or deleted (target range may be empty).
    Replaced,
}

/// A pair of aligned character ranges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub source_start: usize,
    pub source_end: usize,
    pub target_start: usize,
    pub target_end: usize,
    pub kind: SegmentKind,
}

impl Segment {
    pub fn source_len(&self) -> usize {
        self.source_end - self.source_start
    }

    pub fn target_len(&self) -> usize {
        self.target_end - self.target_start
    }
}

/// Ordered segments tiling both the source and the target text.
///
/// Adjacent preserved segments are always coalesced, so a span survives
/// rewriting exactly when it sits inside a single preserved segment.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct OffsetMap {
    segments: Vec<Segment>,
}

/// Outcome of moving a span through an [`OffsetMap`].
#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    Kept(SpanAnnotation),
    /// The span touched rewritten text. `overlap` is the fraction of its
    /// characters that fall inside replaced segments.
    Dropped {
        span: SpanAnnotation,
        overlap: f64,
    },
}

impl Projection {
    pub fn kept(self) -> Option<SpanAnnotation> {
        match self {
            Projection::Kept(s) => Some(s),
            Projection::Dropped { .. } => None,
        }
    }
}

impl OffsetMap {
    /// Identity map over a text of `len` characters.
    pub fn identity(len: usize) -> Self {
        let mut b = OffsetMapBuilder::default();
        b.preserve(len);
        b.finish()
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Segments that rewrote text.
    pub fn substitutions(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Replaced)
    }

    pub fn is_identity(&self) -> bool {
        self.substitutions().next().is_none()
    }

    pub fn source_len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.source_end)
    }

    pub fn target_len(&self) -> usize {
        self.segments.last().map_or(0, |s| s.target_end)
    }

    /// The map from target coordinates back to source coordinates.
    pub fn inverted(&self) -> OffsetMap {
        OffsetMap {
            segments: self
                .segments
                .iter()
                .map(|s| Segment {
                    source_start: s.target_start,
                    source_end: s.target_end,
                    target_start: s.source_start,
                    target_end: s.source_end,
                    kind: s.kind,
                })
                .collect(),
        }
    }

    /// Full source range maps to full target range (the `end` of the last
    /// segment on each side), segments are contiguous on both sides, and
    /// preserved segments keep their length.
    pub fn is_consistent(&self) -> bool {
        let mut src = 0;
        let mut tgt = 0;
        for s in &self.segments {
            if s.source_start != src || s.target_start != tgt {
                return false;
            }
            if s.source_end < s.source_start || s.target_end < s.target_start {
                return false;
            }
            if s.kind == SegmentKind::Preserved && s.source_len() != s.target_len() {
                return false;
            }
            src = s.source_end;
            tgt = s.target_end;
        }
        true
    }

    /// Moves a span from source to target coordinates.
    ///
    /// The span is kept only if it lies inside one preserved segment; then
    /// its surface is unchanged. Otherwise it is dropped and the share of its
    /// characters covered by replaced segments is reported.
    pub fn project_span(&self, span: &SpanAnnotation) -> Projection {
        for seg in &self.segments {
            if seg.kind == SegmentKind::Preserved && seg.source_start <= span.start && span.end <= seg.source_end {
                let shift = |x: usize| x - seg.source_start + seg.target_start;
                return Projection::Kept(SpanAnnotation {
                    tweet_id: span.tweet_id.clone(),
                    start: shift(span.start),
                    end: shift(span.end),
                    surface: span.surface.clone(),
                });
            }
        }
        let covered: usize = self
            .substitutions()
            .map(|seg| {
                let lo = seg.source_start.max(span.start);
                let hi = seg.source_end.min(span.end);
                hi.saturating_sub(lo)
            })
            .sum();
        let len = span.end.saturating_sub(span.start).max(1);
        Projection::Dropped {
            span: span.clone(),
            overlap: covered as f64 / len as f64,
        }
    }
}

/// Incremental construction of an [`OffsetMap`], in character counts.
#[derive(Debug, Default)]
pub struct OffsetMapBuilder {
    segments: Vec<Segment>,
    source: usize,
    target: usize,
}

impl OffsetMapBuilder {
    pub fn preserve(&mut self, chars: usize) {
        if chars == 0 {
            return;
        }
        if let Some(last) = self.segments.last_mut() {
            if last.kind == SegmentKind::Preserved {
                last.source_end += chars;
                last.target_end += chars;
                self.source += chars;
                self.target += chars;
                return;
            }
        }
        self.push(chars, chars, SegmentKind::Preserved);
    }

    pub fn replace(&mut self, source_chars: usize, target_chars: usize) {
        if source_chars == 0 && target_chars == 0 {
            return;
        }
        self.push(source_chars, target_chars, SegmentKind::Replaced);
    }

    fn push(&mut self, source_chars: usize, target_chars: usize, kind: SegmentKind) {
        self.segments.push(Segment {
            source_start: self.source,
            source_end: self.source + source_chars,
            target_start: self.target,
            target_end: self.target + target_chars,
            kind,
        });
        self.source += source_chars;
        self.target += target_chars;
    }

    pub fn finish(self) -> OffsetMap {
        OffsetMap {
            segments: self.segments,
        }
    }
}

/// Replacement of the characters `start..end` of a source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edit {
    pub start: usize,
    pub end: usize,
    pub replacement: String,
}

/// Applies sorted, non-overlapping character-range edits. An edit whose
/// replacement equals the original text is recorded as preserved.
pub fn apply_edits(source: &str, edits: &[Edit]) -> (String, OffsetMap) {
    let idx = CharIndex::new(source);
    let mut out = String::with_capacity(source.len());
    let mut b = OffsetMapBuilder::default();
    let mut pos = 0;
    for e in edits {
        debug_assert!(e.start >= pos && e.end >= e.start);
        out.push_str(&source[idx.byte_range(pos, e.start)]);
        b.preserve(e.start - pos);
        let original = &source[idx.byte_range(e.start, e.end)];
        out.push_str(&e.replacement);
        if original == e.replacement {
            b.preserve(e.end - e.start);
        } else {
            b.replace(e.end - e.start, e.replacement.chars().count());
        }
        pos = e.end;
    }
    out.push_str(&source[idx.byte_range(pos, idx.char_len())]);
    b.preserve(idx.char_len() - pos);
    (out, b.finish())
}
