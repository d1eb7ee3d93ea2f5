use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{text_fields, DetectError, Evidence, EvidenceRule};
use crate::trace::TraceLog;

/// Shipped default list; editable through a keyword file.
pub const DEFAULT_KEYWORDS: &[&str] = &[
    "tensor", "model", "inference", "predict", "forward", "neural", "nn", "cnn", "lstm", "tflite",
    "onnx", "mlkit", "classif", "score", "prob", "embed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatchMode {
    /// Keyword occurs anywhere in the text.
    #[default]
    Substring,
    /// Keyword equals a whole alphanumeric token.
    Token,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeywordSet {
    keywords: BTreeSet<String>,
    pub match_mode: MatchMode,
}

impl Default for KeywordSet {
    fn default() -> Self {
        KeywordSet::new(DEFAULT_KEYWORDS.iter().copied(), MatchMode::Substring).unwrap()
    }
}

impl KeywordSet {
    pub fn new<I, S>(keywords: I, match_mode: MatchMode) -> Result<Self, DetectError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let keywords: BTreeSet<String> = keywords
            .into_iter()
            .map(|k| k.as_ref().trim().to_lowercase())
            .filter(|k| !k.is_empty())
            .collect();
        if keywords.is_empty() {
            return Err(DetectError::EmptyKeywordSet);
        }
        Ok(KeywordSet { keywords, match_mode })
    }

    /// One keyword per line; `#` starts a comment.
    pub fn from_config(text: &str, match_mode: MatchMode) -> Result<Self, DetectError> {
        KeywordSet::new(
            text.lines().map(|l| l.split('#').next().unwrap_or("")),
            match_mode,
        )
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(String::as_str)
    }

    /// Keywords found in `text`, in sorted order.
    pub fn matches<'a>(&'a self, text: &str) -> Vec<&'a str> {
        let lower = text.to_lowercase();
        match self.match_mode {
            MatchMode::Substring => self.keywords().filter(|k| lower.contains(k)).collect(),
            MatchMode::Token => {
                let tokens: BTreeSet<&str> =
                    lower.split(|c: char| !c.is_alphanumeric()).filter(|t| !t.is_empty()).collect();
                self.keywords().filter(|k| tokens.contains(k)).collect()
            }
        }
    }

    pub fn hits_any(&self, text: &str) -> bool {
        !self.matches(text).is_empty()
    }
}

/// One evidence entry per (record, field, keyword) hit, ordered by record,
/// then field, then keyword.
pub fn scan_keywords(log: &TraceLog, kw: &KeywordSet) -> Vec<Evidence> {
    log.records
        .par_iter()
        .enumerate()
        .flat_map_iter(|(index, record)| {
            let mut hits = Vec::new();
            for (field, text) in text_fields(record) {
                for keyword in kw.matches(&text) {
                    hits.push(Evidence::at(
                        index,
                        record,
                        field,
                        EvidenceRule::KeywordHit { keyword: keyword.to_owned() },
                    ));
                }
            }
            hits
        })
        .collect()
}
