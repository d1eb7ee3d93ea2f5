use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};

use super::codec::{self, TypedValue, RECEIVER_LEN};
use super::shorty::{parse_shorty, ShortySignature, TypeKind};
use super::{RejectReason, TraceError};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RecordKind {
    #[serde(rename = "quick")]
    QuickCode,
    #[serde(rename = "jni")]
    JniTrampoline,
    #[serde(rename = "cb")]
    Callback,
}

/// One logged function invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceRecord {
    pub schema_version: u32,
    pub timestamp_ns: u64,
    pub pid: u32,
    pub tid: u32,
    pub kind: RecordKind,
    pub function_name: String,
    pub library: Option<String>,
    /// Byte offset of the function within `library`.
    pub offset: Option<u64>,
    pub is_static: bool,
    pub shorty: Option<String>,
    pub raw_args: Vec<u8>,
    pub raw_return: Vec<u8>,
    pub payload: Option<String>,
    /// Call stack, innermost frame first.
    pub stack: Option<Vec<String>>,
}

impl TraceRecord {
    pub fn new(kind: RecordKind, function_name: impl Into<String>, timestamp_ns: u64) -> Self {
        TraceRecord {
            schema_version: SCHEMA_VERSION,
            timestamp_ns,
            pid: 0,
            tid: 0,
            kind,
            function_name: function_name.into(),
            library: None,
            offset: None,
            is_static: true,
            shorty: None,
            raw_args: Vec::new(),
            raw_return: Vec::new(),
            payload: None,
            stack: None,
        }
    }

    pub fn signature(&self) -> Option<Result<ShortySignature, TraceError>> {
        self.shorty.as_deref().map(parse_shorty)
    }

    /// Decoded arguments, or an empty list for records without a shorty.
    pub fn decode_args(&self) -> Result<Vec<TypedValue>, TraceError> {
        match self.signature() {
            None => Ok(Vec::new()),
            Some(sig) => codec::decode_args(&sig?, &self.raw_args, self.is_static),
        }
    }

    pub fn decode_return(&self) -> Result<Option<TypedValue>, TraceError> {
        match self.signature() {
            None => Ok(None),
            Some(sig) => codec::decode_return(&sig?, &self.raw_return).map(Some),
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&WireRecord::from(self)).expect("trace record serializes")
    }

    pub fn from_json_line(line: &str) -> Result<Self, RejectReason> {
        let wire: WireRecord =
            serde_json::from_str(line).map_err(|e| RejectReason::InvalidJson(e.to_string()))?;
        wire.try_into()
    }

    /// Checks schema version, required fields and that the raw bytes decode.
    pub fn validate(&self) -> Result<(), RejectReason> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(RejectReason::UnsupportedVersion(self.schema_version));
        }
        match self.kind {
            RecordKind::Callback if self.payload.is_none() => Err(RejectReason::MissingPayload),
            RecordKind::QuickCode | RecordKind::JniTrampoline if self.shorty.is_none() => {
                Err(RejectReason::MissingShorty)
            }
            _ => Ok(()),
        }?;
        if let Some(sig) = self.signature() {
            let sig = sig.map_err(|e| RejectReason::BadShorty(e.to_string()))?;
            check_layout(&sig, self.raw_args.len(), self.raw_return.len(), self.is_static)
                .map_err(|e| RejectReason::Undecodable(e.to_string()))?;
        }
        Ok(())
    }
}

/// Length check equivalent to a successful decode, without materializing values.
fn check_layout(
    sig: &ShortySignature,
    args_len: usize,
    ret_len: usize,
    is_static: bool,
) -> Result<(), TraceError> {
    let head = if is_static { 0 } else { RECEIVER_LEN };
    let fixed = head + sig.fixed_args_size();
    let args_ok = if sig.has_trailing_blob() {
        args_len >= fixed - TypeKind::Pointer.byte_size()
    } else {
        args_len == fixed
    };
    if !args_ok {
        return Err(TraceError::LengthMismatch { expected: fixed, actual: args_len });
    }
    let ret_ok = match sig.return_kind {
        TypeKind::Pointer => true,
        k => ret_len == k.return_size(),
    };
    if !ret_ok {
        return Err(TraceError::LengthMismatch {
            expected: sig.return_kind.return_size(),
            actual: ret_len,
        });
    }
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct WireRecord {
    v: u32,
    ts: u64,
    pid: u32,
    tid: u32,
    kind: RecordKind,
    #[serde(rename = "fn")]
    function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lib: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    off: Option<String>,
    #[serde(default = "default_static", rename = "static")]
    is_static: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    shorty: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    args: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    ret: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    payload: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    stack: Option<Vec<String>>,
}

fn default_static() -> bool {
    true
}

pub fn format_offset(off: u64) -> String {
    format!("{off:#x}")
}

pub fn parse_offset(s: &str) -> Option<u64> {
    let hex = s.strip_prefix("0x").or_else(|| s.strip_prefix("0X"))?;
    u64::from_str_radix(hex, 16).ok()
}

impl From<&TraceRecord> for WireRecord {
    fn from(r: &TraceRecord) -> Self {
        let b64 = |bytes: &[u8]| (!bytes.is_empty()).then(|| B64.encode(bytes));
        WireRecord {
            v: r.schema_version,
            ts: r.timestamp_ns,
            pid: r.pid,
            tid: r.tid,
            kind: r.kind,
            function: r.function_name.clone(),
            lib: r.library.clone(),
            off: r.offset.map(format_offset),
            is_static: r.is_static,
            shorty: r.shorty.clone(),
            args: b64(&r.raw_args),
            ret: b64(&r.raw_return),
            payload: r.payload.clone(),
            stack: r.stack.clone(),
        }
    }
}

impl TryFrom<WireRecord> for TraceRecord {
    type Error = RejectReason;

    fn try_from(w: WireRecord) -> Result<Self, Self::Error> {
        let decode = |field: &'static str, s: Option<String>| -> Result<Vec<u8>, RejectReason> {
            match s {
                None => Ok(Vec::new()),
                Some(s) => B64.decode(s).map_err(|_| RejectReason::BadBase64(field)),
            }
        };
        let offset = match w.off {
            None => None,
            Some(s) => Some(parse_offset(&s).ok_or(RejectReason::BadOffset(s))?),
        };
        let record = TraceRecord {
            schema_version: w.v,
            timestamp_ns: w.ts,
            pid: w.pid,
            tid: w.tid,
            kind: w.kind,
            function_name: w.function,
            library: w.lib,
            offset,
            is_static: w.is_static,
            shorty: w.shorty,
            raw_args: decode("args", w.args)?,
            raw_return: decode("ret", w.ret)?,
            payload: w.payload,
            stack: w.stack,
        };
        record.validate()?;
        Ok(record)
    }
}
