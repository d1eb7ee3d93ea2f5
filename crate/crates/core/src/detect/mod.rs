//! Detection layer: flags trace locations that look like ML execution and
//! ranks the functions behind them.
//!
//! Two rules run over the textual content of each record: a case-insensitive
//! keyword search, and a search for numeric arrays whose values all lie in
//! [0, 1] (serialized model outputs). Raw numeric argument slots are not
//! interpreted; only UTF-8 decodable fields and well-formed JSON fragments
//! are considered.

mod keywords;
mod probability;
mod rank;

pub use keywords::{scan_keywords, KeywordSet, MatchMode, DEFAULT_KEYWORDS};
pub use probability::{scan_probability_vectors, ProbabilityScan};
pub use rank::{rank_candidates, CandidateFunction};

use std::borrow::Cow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::trace::{TraceLog, TraceRecord, TypedValue};

#[derive(Debug, Error, PartialEq)]
pub enum DetectError {
    #[error("keyword set is empty")]
    EmptyKeywordSet,
}

/// Where in a record a rule matched. Ordering follows record layout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvidenceField {
    FunctionName,
    Payload,
    DecodedArg(usize),
    DecodedReturn,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleKind {
    KeywordHit,
    ProbabilityVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum EvidenceRule {
    KeywordHit { keyword: String },
    ProbabilityVector { length: usize, min: f64, max: f64 },
}

impl EvidenceRule {
    pub fn kind(&self) -> RuleKind {
        match self {
            EvidenceRule::KeywordHit { .. } => RuleKind::KeywordHit,
            EvidenceRule::ProbabilityVector { .. } => RuleKind::ProbabilityVector,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub record_index: usize,
    pub function_name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
    pub timestamp_ns: u64,
    pub field: EvidenceField,
    #[serde(flatten)]
    pub rule: EvidenceRule,
}

impl Evidence {
    fn at(index: usize, record: &TraceRecord, field: EvidenceField, rule: EvidenceRule) -> Self {
        Evidence {
            record_index: index,
            function_name: record.function_name.clone(),
            library: record.library.clone(),
            timestamp_ns: record.timestamp_ns,
            field,
            rule,
        }
    }
}

/// Both rule sets plus the ranked candidate list.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub evidence: Vec<Evidence>,
    pub candidates: Vec<CandidateFunction>,
}

pub fn detect(log: &TraceLog, keywords: &KeywordSet, scan: &ProbabilityScan) -> Detection {
    let mut evidence = scan_keywords(log, keywords);
    evidence.extend(scan_probability_vectors(log, scan));
    evidence.sort_by(|a, b| (a.record_index, a.field).cmp(&(b.record_index, b.field)));
    let candidates = rank_candidates(&evidence);
    Detection { evidence, candidates }
}

/// Text of a pointer blob, if it is printable UTF-8 once trailing NULs are
/// dropped.
pub fn blob_text(bytes: &[u8]) -> Option<&str> {
    let end = bytes.iter().rposition(|&b| b != 0)? + 1;
    let text = std::str::from_utf8(&bytes[..end]).ok()?;
    text.chars().all(|c| !c.is_control() || c.is_whitespace()).then_some(text)
}

/// Every searchable text field of a record, in [`EvidenceField`] order.
pub(crate) fn text_fields(record: &TraceRecord) -> Vec<(EvidenceField, Cow<'_, str>)> {
    let mut out = vec![(EvidenceField::FunctionName, Cow::Borrowed(record.function_name.as_str()))];
    if let Some(p) = &record.payload {
        out.push((EvidenceField::Payload, Cow::Borrowed(p.as_str())));
    }
    let blob = |v: &TypedValue| match v {
        TypedValue::Pointer(b) => blob_text(b).map(|s| Cow::Owned(s.to_owned())),
        _ => None,
    };
    if let Ok(args) = record.decode_args() {
        for (i, v) in args.iter().enumerate() {
            if let Some(text) = blob(v) {
                out.push((EvidenceField::DecodedArg(i), text));
            }
        }
    }
    if let Ok(Some(ret)) = record.decode_return() {
        if let Some(text) = blob(&ret) {
            out.push((EvidenceField::DecodedReturn, text));
        }
    }
    out
}
