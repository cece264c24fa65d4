//! Tweet normalization in the BERTweet convention: user mentions become a
//! user token, URLs a URL token, and emoji optionally become `:alias:` text.
//! An opt-in mode deletes mentions, hashtags and URLs instead.
//!
//! Every rewrite is recorded in an [`OffsetMap`] so span annotations can be
//! moved between original and normalized coordinates.
//!
//! Patterns:
//! * mention: `@` followed by one or more word characters
//! * hashtag: `#` followed by one or more word characters
//! * URL: `http://`, `https://` or `www.` (ASCII case-insensitive) up to the
//!   next whitespace

pub mod emoji;
pub mod offsets;

use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use emoji::{demojize, EmojiTable};
pub use offsets::{apply_edits, Edit, OffsetMap, Projection, Segment, SegmentKind};

use crate::corpus::{SpanAnnotation, Tweet};
use crate::text::CharIndex;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("{field} must be non-empty and contain no tab or newline")]
    BadToken { field: &'static str },
    #[error("unknown {what} `{value}`")]
    UnknownMode { what: &'static str, value: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EmojiMode {
    #[default]
    Keep,
    Demojize,
}

impl std::str::FromStr for EmojiMode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "keep" => Ok(EmojiMode::Keep),
            "demojize" => Ok(EmojiMode::Demojize),
            _ => Err(ConfigError::UnknownMode {
                what: "emoji mode",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StripMode {
    #[default]
    None,
    StripEntities,
}

impl std::str::FromStr for StripMode {
    type Err = ConfigError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(StripMode::None),
            "strip_entities" | "strip-entities" => Ok(StripMode::StripEntities),
            _ => Err(ConfigError::UnknownMode {
                what: "strip mode",
                value: s.into(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizationConfig {
    pub user_token: String,
    pub url_token: String,
    pub emoji_mode: EmojiMode,
    pub strip_mode: StripMode,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        NormalizationConfig {
            user_token: "@USER".into(),
            url_token: "HTTPURL".into(),
            emoji_mode: EmojiMode::Keep,
            strip_mode: StripMode::None,
        }
    }
}

impl NormalizationConfig {
    /// Mention/URL replacement plus emoji aliasing.
    pub fn bertweet() -> Self {
        NormalizationConfig {
            emoji_mode: EmojiMode::Demojize,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let ok = |s: &str| !s.is_empty() && !s.contains(['\t', '\n', '\r']);
        if !ok(&self.user_token) {
            return Err(ConfigError::BadToken { field: "user_token" });
        }
        if !ok(&self.url_token) {
            return Err(ConfigError::BadToken { field: "url_token" });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedTweet {
    pub tweet_id: String,
    pub text: String,
    pub offset_map: OffsetMap,
}

impl NormalizedTweet {
    pub fn as_tweet(&self) -> Tweet {
        Tweet::new(self.tweet_id.clone(), self.text.clone())
    }
}

struct Patterns {
    replace: Regex,
    strip: Regex,
}

fn patterns() -> &'static Patterns {
    static P: OnceLock<Patterns> = OnceLock::new();
    P.get_or_init(|| Patterns {
        replace: Regex::new(r"(?P<url>(?i:https?://|www\.)\S*)|(?P<mention>@\w+)").unwrap(),
        strip: Regex::new(r"(?i:https?://|www\.)\S*|@\w+|#\w+").unwrap(),
    })
}

/// Applies a [`NormalizationConfig`] with a chosen emoji table.
#[derive(Debug, Clone)]
pub struct Normalizer<'a> {
    config: NormalizationConfig,
    table: &'a EmojiTable,
}

impl Normalizer<'static> {
    pub fn new(config: NormalizationConfig) -> Result<Self, ConfigError> {
        Normalizer::with_table(config, EmojiTable::bundled())
    }
}

impl<'a> Normalizer<'a> {
    pub fn with_table(config: NormalizationConfig, table: &'a EmojiTable) -> Result<Self, ConfigError> {
        config.validate()?;
        Ok(Normalizer { config, table })
    }

    pub fn config(&self) -> &NormalizationConfig {
        &self.config
    }

    pub fn normalize(&self, tweet: &Tweet) -> NormalizedTweet {
        let edits = match self.config.strip_mode {
            StripMode::None => self.replacement_edits(&tweet.text),
            StripMode::StripEntities => self.strip_edits(&tweet.text),
        };
        let (text, offset_map) = apply_edits(&tweet.text, &edits);
        NormalizedTweet {
            tweet_id: tweet.id.clone(),
            text,
            offset_map,
        }
    }

    fn emoji_edits(&self, text: &str) -> Vec<Edit> {
        match self.config.emoji_mode {
            EmojiMode::Keep => Vec::new(),
            EmojiMode::Demojize => self.table.edits(text),
        }
    }

    /// Mentions and URLs are replaced; emoji are aliased in the text between
    /// them.
    fn replacement_edits(&self, text: &str) -> Vec<Edit> {
        let idx = CharIndex::new(text);
        let mut edits = Vec::new();
        let mut prev = 0;
        let gap = |edits: &mut Vec<Edit>, from: usize, to: usize| {
            let offset = from;
            for mut e in self.emoji_edits(&text[idx.byte_range(from, to)]) {
                e.start += offset;
                e.end += offset;
                edits.push(e);
            }
        };
        for caps in patterns().replace.captures_iter(text) {
            let (m, token) = match (caps.name("url"), caps.name("mention")) {
                (Some(m), _) => (m, &self.config.url_token),
                (None, Some(m)) => (m, &self.config.user_token),
                (None, None) => unreachable!(),
            };
            let start = idx.char_floor(m.start());
            let end = idx.char_floor(m.end());
            gap(&mut edits, prev, start);
            edits.push(Edit {
                start,
                end,
                replacement: token.clone(),
            });
            prev = end;
        }
        gap(&mut edits, prev, idx.char_len());
        edits
    }

    /// Deletes entities with one adjacent space, repeating until no entity is
    /// left (a deletion can join text into a new match), then aliases emoji
    /// in what remains.
    fn strip_edits(&self, text: &str) -> Vec<Edit> {
        let src: Vec<char> = text.chars().collect();
        let mut deleted = vec![false; src.len()];
        loop {
            // current text and the source index of each of its characters
            let live: Vec<usize> = (0..src.len()).filter(|&i| !deleted[i]).collect();
            let current: String = live.iter().map(|&i| src[i]).collect();
            let idx = CharIndex::new(&current);
            let mut gone = vec![false; live.len()];
            let mut changed = false;
            for m in patterns().strip.find_iter(&current) {
                let start = idx.char_floor(m.start());
                let end = idx.char_floor(m.end());
                gone[start..end].iter_mut().for_each(|g| *g = true);
                if start > 0 && current_char(&src, &live, start - 1) == ' ' && !gone[start - 1] {
                    gone[start - 1] = true;
                } else if end < live.len() && current_char(&src, &live, end) == ' ' {
                    gone[end] = true;
                }
                changed = true;
            }
            if !changed {
                break;
            }
            for (k, &i) in live.iter().enumerate() {
                if gone[k] {
                    deleted[i] = true;
                }
            }
        }

        // Emoji edits are found on the stripped text and widened to source
        // coordinates, absorbing any deleted characters they straddle.
        let live: Vec<usize> = (0..src.len()).filter(|&i| !deleted[i]).collect();
        let stripped: String = live.iter().map(|&i| src[i]).collect();
        let mut edits: Vec<Edit> = Vec::new();
        let mut absorbed = vec![false; src.len()];
        let mut emoji: Vec<Edit> = self
            .emoji_edits(&stripped)
            .into_iter()
            .map(|e| {
                let start = live[e.start];
                let end = live[e.end - 1] + 1;
                absorbed[start..end].iter_mut().for_each(|a| *a = true);
                Edit {
                    start,
                    end,
                    replacement: e.replacement,
                }
            })
            .collect();
        let mut i = 0;
        while i < src.len() {
            if deleted[i] && !absorbed[i] {
                let start = i;
                while i < src.len() && deleted[i] && !absorbed[i] {
                    i += 1;
                }
                edits.push(Edit {
                    start,
                    end: i,
                    replacement: String::new(),
                });
            } else {
                i += 1;
            }
        }
        edits.append(&mut emoji);
        edits.sort_by_key(|e| e.start);
        edits
    }
}

fn current_char(src: &[char], live: &[usize], k: usize) -> char {
    src[live[k]]
}

/// Normalizes with the bundled emoji table.
///
/// # Panics
///
/// If `config` has an empty or multi-line token; see
/// [`NormalizationConfig::validate`].
pub fn normalize_tweet(tweet: &Tweet, config: &NormalizationConfig) -> NormalizedTweet {
    Normalizer::new(config.clone())
        .expect("invalid normalization config")
        .normalize(tweet)
}

/// Deletes mentions, hashtags and URLs (each with one adjacent space).
pub fn strip_entities(tweet: &Tweet) -> NormalizedTweet {
    let config = NormalizationConfig {
        strip_mode: StripMode::StripEntities,
        ..Default::default()
    };
    normalize_tweet(tweet, &config)
}

/// Moves a span from original to normalized coordinates; see
/// [`OffsetMap::project_span`].
pub fn project_span(map: &OffsetMap, span: &SpanAnnotation) -> Projection {
    map.project_span(span)
}
