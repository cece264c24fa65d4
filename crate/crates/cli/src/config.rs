//! `key = value` run configuration files.
//!
//! One setting per line; `#` starts a comment; blank lines are ignored.
//! Keys are the long flag names with `_` for `-`. Unknown keys and values
//! that do not parse are rejected with their line number.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use tweetade::eval::SpanMatchMode;
use tweetade::normalize::{EmojiMode, StripMode};
use tweetade::LabelScheme;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.line == 0 {
            write!(f, "{}", self.message)
        } else {
            write!(f, "line {}: {}", self.line, self.message)
        }
    }
}

impl std::error::Error for ConfigError {}

/// Settings that may come from a config file. `None` means "not set"; the
/// command then falls back to its flag or built-in default.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub jobs: Option<usize>,
    pub header: Option<bool>,
    pub strict_errors: Option<bool>,
    pub scheme: Option<LabelScheme>,
    pub oversample: Option<f64>,
    pub undersample: Option<f64>,
    pub epochs: Option<usize>,
    pub learning_rate: Option<f64>,
    pub l2: Option<f64>,
    pub feature_dim: Option<usize>,
    pub batch_size: Option<usize>,
    pub mode: Option<SpanMatchMode>,
    pub normalize: Option<bool>,
    pub emoji: Option<EmojiMode>,
    pub strip: Option<StripMode>,
    pub user_token: Option<String>,
    pub url_token: Option<String>,
    pub vocab: Option<PathBuf>,
    pub merges: Option<PathBuf>,
}

fn parse<T: FromStr>(value: &str) -> Result<Option<T>, String>
where
    T::Err: fmt::Display,
{
    value
        .parse::<T>()
        .map(Some)
        .map_err(|e| format!("invalid value `{value}`: {e}"))
}

impl RunConfig {
    #[cfg(test)]
    pub const KEYS: &'static [&'static str] = &[
        "seed",
        "jobs",
        "header",
        "strict_errors",
        "scheme",
        "oversample",
        "undersample",
        "epochs",
        "learning_rate",
        "l2",
        "feature_dim",
        "batch_size",
        "mode",
        "normalize",
        "emoji",
        "strip",
        "user_token",
        "url_token",
        "vocab",
        "merges",
    ];

    fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        match key {
            "seed" => self.seed = parse(value)?,
            "jobs" => self.jobs = parse(value)?,
            "header" => self.header = parse(value)?,
            "strict_errors" => self.strict_errors = parse(value)?,
            "scheme" => self.scheme = parse(value)?,
            "oversample" => self.oversample = parse(value)?,
            "undersample" => self.undersample = parse(value)?,
            "epochs" => self.epochs = parse(value)?,
            "learning_rate" => self.learning_rate = parse(value)?,
            "l2" => self.l2 = parse(value)?,
            "feature_dim" => self.feature_dim = parse(value)?,
            "batch_size" => self.batch_size = parse(value)?,
            "mode" => self.mode = parse(value)?,
            "normalize" => self.normalize = parse(value)?,
            "emoji" => self.emoji = parse(value)?,
            "strip" => self.strip = parse(value)?,
            "user_token" => self.user_token = Some(value.to_string()),
            "url_token" => self.url_token = Some(value.to_string()),
            "vocab" => self.vocab = Some(PathBuf::from(value)),
            "merges" => self.merges = Some(PathBuf::from(value)),
            _ => return Err(format!("unknown key `{key}`")),
        }
        Ok(())
    }

    pub fn parse_str(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split_once('#').map_or(raw, |(before, _)| before).trim();
            if content.is_empty() {
                continue;
            }
            let err = |message: String| ConfigError { line, message };
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if value.is_empty() {
                return Err(err(format!("missing value for `{key}`")));
            }
            cfg.set(key, value).map_err(err)?;
        }
        Ok(cfg)
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        line: 0,
        message: format!("{}: {e}", path.display()),
    })?;
    RunConfig::parse_str(&text)
}
