use std::collections::HashMap;
use std::fmt;
use std::fs;
use std::path::Path;

use serde::de::{Deserializer, MapAccess, Visitor};
use serde::Deserialize;

use super::bytes::ByteEncoder;
use super::TokenizeError;

/// Token ↔ id tables plus ranked merge rules (index = rank, lower first).
/// A merge pair with the 1-based line it was read from.
pub type NumberedMerge = (usize, (String, String));

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BpeVocab {
    token_to_id: HashMap<String, u32>,
    id_to_token: HashMap<u32, String>,
    merges: Vec<(String, String)>,
    ranks: HashMap<String, HashMap<String, usize>>,
}

/// JSON object entries in file order, so duplicates can be reported.
struct Entries(Vec<(String, u32)>);

impl<'de> Deserialize<'de> for Entries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a JSON object mapping token strings to integer ids")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> Result<Entries, A::Error> {
                let mut out = Vec::with_capacity(map.size_hint().unwrap_or(0));
                while let Some((k, v)) = map.next_entry::<String, u32>()? {
                    out.push((k, v));
                }
                Ok(Entries(out))
            }
        }
        d.deserialize_map(V)
    }
}

impl BpeVocab {
    pub fn from_parts(
        entries: impl IntoIterator<Item = (String, u32)>,
        merges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, TokenizeError> {
        let mut token_to_id = HashMap::new();
        let mut id_to_token = HashMap::new();
        for (token, id) in entries {
            if token_to_id.contains_key(&token) {
                return Err(TokenizeError::DuplicateToken(token));
            }
            if let Some(prev) = id_to_token.get(&id) {
                return Err(TokenizeError::IdCollision {
                    id,
                    first: String::clone(prev),
                    second: token,
                });
            }
            token_to_id.insert(token.clone(), id);
            id_to_token.insert(id, token);
        }
        let mut vocab = BpeVocab {
            token_to_id,
            id_to_token,
            merges: Vec::new(),
            ranks: HashMap::new(),
        };
        for (i, pair) in merges.into_iter().enumerate() {
            vocab.push_merge(i + 1, pair)?;
        }
        Ok(vocab)
    }

    fn push_merge(&mut self, line: usize, pair: (String, String)) -> Result<(), TokenizeError> {
        if self.merge_rank(&pair.0, &pair.1).is_some() {
            return Err(TokenizeError::DuplicateMerge {
                line,
                left: pair.0,
                right: pair.1,
            });
        }
        self.ranks
            .entry(pair.0.clone())
            .or_default()
            .insert(pair.1.clone(), self.merges.len());
        self.merges.push(pair);
        Ok(())
    }

    /// The 256 byte symbols (ids 0..=255 in byte order), followed by one token
    /// per merge result in merge order. Merge results already present keep
    /// their first id.
    pub fn byte_level(merges: impl IntoIterator<Item = (String, String)>) -> Result<Self, TokenizeError> {
        let enc = ByteEncoder::global();
        let mut entries: Vec<(String, u32)> = (0..=255u8)
            .map(|b| (enc.encode_byte(b).to_string(), u32::from(b)))
            .collect();
        let merges: Vec<(String, String)> = merges.into_iter().collect();
        let mut seen: std::collections::HashSet<String> = entries.iter().map(|(t, _)| t.clone()).collect();
        for (l, r) in &merges {
            let joined = format!("{l}{r}");
            if seen.insert(joined.clone()) {
                entries.push((joined, entries.len() as u32));
            }
        }
        BpeVocab::from_parts(entries, merges)
    }

    pub fn parse_vocab_json(json: &str) -> Result<Vec<(String, u32)>, TokenizeError> {
        serde_json::from_str::<Entries>(json)
            .map(|e| e.0)
            .map_err(|e| TokenizeError::VocabFormat(e.to_string()))
    }

    /// Merges text: an optional first line starting with `#`, then one
    /// `left right` pair per line. Blank lines are skipped.
    pub fn parse_merges(text: &str) -> Result<Vec<NumberedMerge>, TokenizeError> {
        let mut out = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if (i == 0 && line.starts_with('#')) || line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(' ').collect();
            if fields.len() != 2 || fields.iter().any(|f| f.is_empty()) {
                return Err(TokenizeError::MalformedMerge {
                    line: i + 1,
                    content: line.to_string(),
                });
            }
            out.push((i + 1, (fields[0].to_string(), fields[1].to_string())));
        }
        Ok(out)
    }

    pub fn from_strings(vocab_json: &str, merges_text: &str) -> Result<Self, TokenizeError> {
        let entries = BpeVocab::parse_vocab_json(vocab_json)?;
        let mut vocab = BpeVocab::from_parts(entries, std::iter::empty())?;
        for (line, pair) in BpeVocab::parse_merges(merges_text)? {
            vocab.push_merge(line, pair)?;
        }
        Ok(vocab)
    }

    pub fn token_id(&self, token: &str) -> Option<u32> {
        self.token_to_id.get(token).copied()
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.id_to_token.get(&id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.token_to_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.token_to_id.is_empty()
    }

    pub fn merges(&self) -> &[(String, String)] {
        &self.merges
    }

    pub fn merge_rank(&self, left: &str, right: &str) -> Option<usize> {
        self.ranks.get(left).and_then(|m| m.get(right)).copied()
    }

    /// Entries sorted by id, for serialization.
    pub fn entries(&self) -> Vec<(&str, u32)> {
        let mut v: Vec<(&str, u32)> = self.token_to_id.iter().map(|(t, &i)| (t.as_str(), i)).collect();
        v.sort_by_key(|&(_, i)| i);
        v
    }
}

/// Loads a JSON vocabulary and a merges file.
pub fn load_vocab(vocab_path: &Path, merges_path: &Path) -> Result<BpeVocab, TokenizeError> {
    let read = |p: &Path| {
        fs::read_to_string(p).map_err(|e| TokenizeError::Io {
            path: p.display().to_string(),
            source: e,
        })
    };
    BpeVocab::from_strings(&read(vocab_path)?, &read(merges_path)?)
}
