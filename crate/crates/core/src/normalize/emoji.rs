//! Emoji → `:alias:` table and longest-match replacement.
//!
//! The bundled table is `data/emoji_aliases.tsv`: one emoji per line as
//! space-separated hex codepoints, a tab, and the alias. Lines starting with
//! `#` are comments.

use std::collections::{HashMap, HashSet};
use std::io::BufRead;
use std::sync::OnceLock;

use thiserror::Error;

use super::offsets::Edit;
use crate::text::CharIndex;

const BUNDLED: &str = include_str!("../../data/emoji_aliases.tsv");

#[derive(Debug, Error)]
pub enum EmojiTableError {
    #[error("emoji table line {line}: {message}")]
    Malformed { line: usize, message: String },
    #[error("emoji table: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Default)]
pub struct EmojiTable {
    aliases: HashMap<String, String>,
    first_chars: HashSet<char>,
    max_chars: usize,
}

impl EmojiTable {
    /// The table shipped with the crate, parsed once.
    pub fn bundled() -> &'static EmojiTable {
        static TABLE: OnceLock<EmojiTable> = OnceLock::new();
        TABLE.get_or_init(|| EmojiTable::from_reader(BUNDLED.as_bytes()).expect("bundled emoji table is valid"))
    }

    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, EmojiTableError> {
        let mut table = EmojiTable::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let malformed = |message: String| EmojiTableError::Malformed { line: lineno, message };
            let (hex, alias) = line
                .split_once('\t')
                .ok_or_else(|| malformed("expected `codepoints<TAB>alias`".into()))?;
            if alias.is_empty() || alias.contains('\t') {
                return Err(malformed(format!("bad alias `{alias}`")));
            }
            let mut seq = String::new();
            for cp in hex.split(' ') {
                let c = u32::from_str_radix(cp, 16)
                    .ok()
                    .and_then(char::from_u32)
                    .ok_or_else(|| malformed(format!("bad codepoint `{cp}`")))?;
                seq.push(c);
            }
            table.insert(seq, alias.to_string());
        }
        Ok(table)
    }

    pub fn insert(&mut self, emoji: String, alias: String) {
        let Some(first) = emoji.chars().next() else { return };
        self.first_chars.insert(first);
        self.max_chars = self.max_chars.max(emoji.chars().count());
        self.aliases.insert(emoji, alias);
    }

    pub fn len(&self) -> usize {
        self.aliases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aliases.is_empty()
    }

    pub fn alias(&self, emoji: &str) -> Option<&str> {
        self.aliases.get(emoji).map(String::as_str)
    }

    /// Longest-match scan, left to right. Edits are in character indices of
    /// `text`.
    pub fn edits(&self, text: &str) -> Vec<Edit> {
        let idx = CharIndex::new(text);
        let n = idx.char_len();
        let mut out = Vec::new();
        let mut i = 0;
        while i < n {
            let c = text[idx.byte_of(i)..].chars().next().unwrap();
            if self.first_chars.contains(&c) {
                let longest = (1..=self.max_chars.min(n - i)).rev().find_map(|len| {
                    self.aliases
                        .get(&text[idx.byte_range(i, i + len)])
                        .map(|alias| (len, alias))
                });
                if let Some((len, alias)) = longest {
                    out.push(Edit {
                        start: i,
                        end: i + len,
                        replacement: alias.clone(),
                    });
                    i += len;
                    continue;
                }
            }
            i += 1;
        }
        out
    }

    pub fn demojize(&self, text: &str) -> String {
        super::offsets::apply_edits(text, &self.edits(text)).0
    }
}

/// Replaces every emoji in the bundled table with its `:alias:`.
pub fn demojize(text: &str) -> String {
    EmojiTable::bundled().demojize(text)
}
