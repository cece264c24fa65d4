//! Conversions between Unicode scalar-value indices and UTF-8 byte offsets.
//!
//! Span annotations count characters (scalar values); regex matches and BPE
//! offsets count bytes.

/// Byte offset of every character boundary in a string, including the end.
#[derive(Debug, Clone)]
pub struct CharIndex {
    boundaries: Vec<usize>,
}

impl CharIndex {
    pub fn new(text: &str) -> Self {
        let mut boundaries: Vec<usize> = text.char_indices().map(|(b, _)| b).collect();
        boundaries.push(text.len());
        CharIndex { boundaries }
    }

    /// Number of characters in the indexed text.
    pub fn char_len(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn byte_len(&self) -> usize {
        *self.boundaries.last().unwrap()
    }

    /// Byte offset of character `ch`. `ch == char_len()` maps to the byte length.
    pub fn byte_of(&self, ch: usize) -> usize {
        self.boundaries[ch]
    }

    /// Character containing `byte` (or starting there). Bytes inside a
    /// multi-byte character round down.
    pub fn char_floor(&self, byte: usize) -> usize {
        match self.boundaries.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i - 1,
        }
    }

    /// Smallest character boundary at or after `byte`.
    pub fn char_ceil(&self, byte: usize) -> usize {
        match self.boundaries.binary_search(&byte) {
            Ok(i) => i,
            Err(i) => i,
        }
    }

    /// Byte range of the character range `start..end`.
    pub fn byte_range(&self, start: usize, end: usize) -> std::ops::Range<usize> {
        self.boundaries[start]..self.boundaries[end]
    }
}

/// Number of Unicode scalar values in `s`.
pub fn char_len(s: &str) -> usize {
    s.chars().count()
}

/// Substring by character range. Panics if out of bounds.
pub fn char_slice(s: &str, start: usize, end: usize) -> &str {
    let idx = CharIndex::new(s);
    &s[idx.byte_range(start, end)]
}
