//! Label schemes for the two shared tasks.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabelError {
    #[error("unknown label scheme `{0}` (expected binary-ADE or ternary-COVID)")]
    UnknownScheme(String),
    #[error("label `{label}` is not part of the {scheme} scheme")]
    UnknownLabel { label: String, scheme: LabelScheme },
}

/// Which label inventory a dataset uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LabelScheme {
    /// ADE vs. NoADE.
    #[serde(rename = "binary-ADE")]
    BinaryAde,
    /// Literature/news mentions, non-personal reports, self-reports.
    #[serde(rename = "ternary-COVID")]
    TernaryCovid,
}

impl LabelScheme {
    /// Labels in scheme order. Ties anywhere in the crate resolve to the
    /// earliest label in this list.
    pub fn labels(self) -> &'static [ClassLabel] {
        match self {
            LabelScheme::BinaryAde => &[ClassLabel::Ade, ClassLabel::NoAde],
            LabelScheme::TernaryCovid => &[ClassLabel::LitNews, ClassLabel::NonPersonal, ClassLabel::SelfReport],
        }
    }

    pub fn num_classes(self) -> usize {
        self.labels().len()
    }

    /// Position of `label` in scheme order, or `None` if it belongs elsewhere.
    pub fn index_of(self, label: ClassLabel) -> Option<usize> {
        self.labels().iter().position(|&l| l == label)
    }

    pub fn contains(self, label: ClassLabel) -> bool {
        label.scheme() == self
    }

    pub fn parse_label(self, s: &str) -> Result<ClassLabel, LabelError> {
        match s.parse::<ClassLabel>() {
            Ok(label) if label.scheme() == self => Ok(label),
            _ => Err(LabelError::UnknownLabel {
                label: s.to_string(),
                scheme: self,
            }),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            LabelScheme::BinaryAde => "binary-ADE",
            LabelScheme::TernaryCovid => "ternary-COVID",
        }
    }

    /// Headline class reported on leaderboards, if the task has one.
    pub fn focus_class(self) -> Option<ClassLabel> {
        match self {
            LabelScheme::BinaryAde => Some(ClassLabel::Ade),
            LabelScheme::TernaryCovid => None,
        }
    }
}

impl fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LabelScheme {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "binary-ADE" => Ok(LabelScheme::BinaryAde),
            "ternary-COVID" => Ok(LabelScheme::TernaryCovid),
            other => Err(LabelError::UnknownScheme(other.to_string())),
        }
    }
}

/// A class label. The scheme is implied by the variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ClassLabel {
    #[serde(rename = "ADE")]
    Ade,
    #[serde(rename = "NoADE")]
    NoAde,
    LitNews,
    NonPersonal,
    SelfReport,
}

impl ClassLabel {
    pub fn scheme(self) -> LabelScheme {
        match self {
            ClassLabel::Ade | ClassLabel::NoAde => LabelScheme::BinaryAde,
            ClassLabel::LitNews | ClassLabel::NonPersonal | ClassLabel::SelfReport => LabelScheme::TernaryCovid,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ClassLabel::Ade => "ADE",
            ClassLabel::NoAde => "NoADE",
            ClassLabel::LitNews => "LitNews",
            ClassLabel::NonPersonal => "NonPersonal",
            ClassLabel::SelfReport => "SelfReport",
        }
    }
}

impl fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClassLabel {
    type Err = LabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "ADE" => Ok(ClassLabel::Ade),
            "NoADE" => Ok(ClassLabel::NoAde),
            "LitNews" => Ok(ClassLabel::LitNews),
            "NonPersonal" => Ok(ClassLabel::NonPersonal),
            "SelfReport" => Ok(ClassLabel::SelfReport),
            other => Err(LabelError::UnknownLabel {
                label: other.to_string(),
                scheme: LabelScheme::BinaryAde,
            }),
        }
    }
}
