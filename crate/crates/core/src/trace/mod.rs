//! Trace data model, line-delimited JSON log format and shorty-typed codec.

mod codec;
mod reader;
mod record;
mod shorty;

pub use codec::{
    decode_args, decode_return, encode_args, encode_return, signature_of, TypedValue,
    MAX_BLOB_LEN, RECEIVER_LEN,
};
pub use reader::{parse_trace, ParseOptions, TraceCounters, TraceLog, TraceReader};
pub use record::{format_offset, parse_offset, RecordKind, TraceRecord, SCHEMA_VERSION};
pub use shorty::{parse_shorty, ShortySignature, TypeKind};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("empty shorty")]
    EmptyShorty,
    #[error("unknown shorty character {ch:?} at position {position}")]
    UnknownShortyChar { ch: char, position: usize },
    #[error("void type at argument position {position}")]
    VoidArgument { position: usize },
    #[error("raw bytes length {actual}, layout requires {expected}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("object blob of {len} bytes exceeds {MAX_BLOB_LEN}")]
    BlobTooLarge { len: usize },
    #[error("non-trailing object argument at position {position} must be a 4-byte handle, got {len} bytes")]
    HandleWidth { position: usize, len: usize },
    #[error("{rejected} of {read} records rejected, above the {max_ratio} threshold")]
    ExcessiveCorruption { read: u64, rejected: u64, max_ratio: f64 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Why a trace line was skipped.
#[derive(Debug, Clone, PartialEq)]
pub enum RejectReason {
    InvalidUtf8,
    InvalidJson(String),
    UnsupportedVersion(u32),
    MissingShorty,
    MissingPayload,
    BadShorty(String),
    Undecodable(String),
    BadBase64(&'static str),
    BadOffset(String),
    NonMonotonicTimestamp { previous: u64, current: u64 },
}

impl RejectReason {
    /// Stable identifier used as the counter key.
    pub fn label(&self) -> &'static str {
        match self {
            RejectReason::InvalidUtf8 => "invalid_utf8",
            RejectReason::InvalidJson(_) => "invalid_json",
            RejectReason::UnsupportedVersion(_) => "unsupported_version",
            RejectReason::MissingShorty => "missing_shorty",
            RejectReason::MissingPayload => "missing_payload",
            RejectReason::BadShorty(_) => "bad_shorty",
            RejectReason::Undecodable(_) => "undecodable",
            RejectReason::BadBase64(_) => "bad_base64",
            RejectReason::BadOffset(_) => "bad_offset",
            RejectReason::NonMonotonicTimestamp { .. } => "non_monotonic_timestamp",
        }
    }
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RejectReason::InvalidJson(m)
            | RejectReason::BadShorty(m)
            | RejectReason::Undecodable(m) => write!(f, "{}: {m}", self.label()),
            RejectReason::UnsupportedVersion(v) => write!(f, "{}: {v}", self.label()),
            RejectReason::BadBase64(field) => write!(f, "{}: {field}", self.label()),
            RejectReason::BadOffset(s) => write!(f, "{}: {s:?}", self.label()),
            RejectReason::NonMonotonicTimestamp { previous, current } => {
                write!(f, "{}: {current} after {previous}", self.label())
            }
            _ => f.write_str(self.label()),
        }
    }
}
