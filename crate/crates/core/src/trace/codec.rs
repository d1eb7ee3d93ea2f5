//! Little-endian codec between raw argument/return bytes and typed values.
//!
//! Layout: arguments are packed contiguously with no alignment padding, each
//! in its fixed slot width. Narrow kinds (bool, byte, short, char) sit in the
//! low-order bytes of a 4-byte slot. An object pointer in the last argument
//! position is captured as an opaque blob of at most [`MAX_BLOB_LEN`] bytes;
//! pointers elsewhere are 4-byte handles. Non-static invocations carry the
//! 4-byte receiver handle first, which decoding skips.

use std::fmt;

use super::shorty::{ShortySignature, TypeKind};
use super::TraceError;

/// Fixed number of bytes logged for a trailing object argument.
pub const MAX_BLOB_LEN: usize = 500;

/// Width of the receiver handle prepended to non-static argument arrays.
pub const RECEIVER_LEN: usize = 4;

#[derive(Debug, Clone)]
pub enum TypedValue {
    Void,
    Bool(bool),
    Byte(i8),
    Short(i16),
    Char(u16),
    Int(i32),
    Long(i64),
    Float(f32),
    Double(f64),
    Pointer(Vec<u8>),
}

impl TypedValue {
    pub fn kind(&self) -> TypeKind {
        match self {
            TypedValue::Void => TypeKind::Void,
            TypedValue::Bool(_) => TypeKind::Bool,
            TypedValue::Byte(_) => TypeKind::Byte,
            TypedValue::Short(_) => TypeKind::Short,
            TypedValue::Char(_) => TypeKind::Char,
            TypedValue::Int(_) => TypeKind::Int,
            TypedValue::Long(_) => TypeKind::Long,
            TypedValue::Float(_) => TypeKind::Float,
            TypedValue::Double(_) => TypeKind::Double,
            TypedValue::Pointer(_) => TypeKind::Pointer,
        }
    }

    pub fn as_blob(&self) -> Option<&[u8]> {
        match self {
            TypedValue::Pointer(b) => Some(b),
            _ => None,
        }
    }

    fn write_slot(&self, out: &mut Vec<u8>) {
        match *self {
            TypedValue::Void => {}
            TypedValue::Bool(b) => out.extend_from_slice(&(b as u32).to_le_bytes()),
            TypedValue::Byte(v) => out.extend_from_slice(&(v as i32).to_le_bytes()),
            TypedValue::Short(v) => out.extend_from_slice(&(v as i32).to_le_bytes()),
            TypedValue::Char(v) => out.extend_from_slice(&(v as u32).to_le_bytes()),
            TypedValue::Int(v) => out.extend_from_slice(&v.to_le_bytes()),
            TypedValue::Long(v) => out.extend_from_slice(&v.to_le_bytes()),
            TypedValue::Float(v) => out.extend_from_slice(&v.to_le_bytes()),
            TypedValue::Double(v) => out.extend_from_slice(&v.to_le_bytes()),
            TypedValue::Pointer(ref b) => out.extend_from_slice(b),
        }
    }
}

// Floats compare by bit pattern so that NaN payloads survive round trips.
impl PartialEq for TypedValue {
    fn eq(&self, other: &Self) -> bool {
        use TypedValue::*;
        match (self, other) {
            (Void, Void) => true,
            (Bool(a), Bool(b)) => a == b,
            (Byte(a), Byte(b)) => a == b,
            (Short(a), Short(b)) => a == b,
            (Char(a), Char(b)) => a == b,
            (Int(a), Int(b)) => a == b,
            (Long(a), Long(b)) => a == b,
            (Float(a), Float(b)) => a.to_bits() == b.to_bits(),
            (Double(a), Double(b)) => a.to_bits() == b.to_bits(),
            (Pointer(a), Pointer(b)) => a == b,
            _ => false,
        }
    }
}

impl Eq for TypedValue {}

impl fmt::Display for TypedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TypedValue::Void => write!(f, "void"),
            TypedValue::Bool(v) => write!(f, "{v}"),
            TypedValue::Byte(v) => write!(f, "{v}"),
            TypedValue::Short(v) => write!(f, "{v}"),
            TypedValue::Char(v) => match char::from_u32(u32::from(*v)) {
                Some(c) if !c.is_control() => write!(f, "'{c}'"),
                _ => write!(f, "\\u{{{v:04x}}}"),
            },
            TypedValue::Int(v) => write!(f, "{v}"),
            TypedValue::Long(v) => write!(f, "{v}L"),
            TypedValue::Float(v) => write!(f, "{v}f"),
            TypedValue::Double(v) => write!(f, "{v}"),
            TypedValue::Pointer(b) => {
                write!(f, "<{} bytes:", b.len())?;
                for byte in b.iter().take(16) {
                    write!(f, " {byte:02x}")?;
                }
                if b.len() > 16 {
                    write!(f, " ..")?;
                }
                write!(f, ">")
            }
        }
    }
}

fn read_slot(kind: TypeKind, bytes: &[u8]) -> TypedValue {
    let w4 = || <[u8; 4]>::try_from(&bytes[..4]).unwrap();
    let w8 = || <[u8; 8]>::try_from(&bytes[..8]).unwrap();
    match kind {
        TypeKind::Void => TypedValue::Void,
        TypeKind::Bool => TypedValue::Bool(bytes[0] != 0),
        TypeKind::Byte => TypedValue::Byte(bytes[0] as i8),
        TypeKind::Short => TypedValue::Short(i16::from_le_bytes([bytes[0], bytes[1]])),
        TypeKind::Char => TypedValue::Char(u16::from_le_bytes([bytes[0], bytes[1]])),
        TypeKind::Int => TypedValue::Int(i32::from_le_bytes(w4())),
        TypeKind::Long => TypedValue::Long(i64::from_le_bytes(w8())),
        TypeKind::Float => TypedValue::Float(f32::from_le_bytes(w4())),
        TypeKind::Double => TypedValue::Double(f64::from_le_bytes(w8())),
        TypeKind::Pointer => TypedValue::Pointer(bytes[..4].to_vec()),
    }
}

pub fn decode_args(
    sig: &ShortySignature,
    raw: &[u8],
    is_static: bool,
) -> Result<Vec<TypedValue>, TraceError> {
    let mut at = if is_static { 0 } else { RECEIVER_LEN };
    let required = at + sig.fixed_args_size();
    let mismatch = || TraceError::LengthMismatch { expected: required, actual: raw.len() };
    if raw.len() < at {
        return Err(mismatch());
    }
    let last = sig.arg_kinds.len().saturating_sub(1);
    let mut values = Vec::with_capacity(sig.arg_kinds.len());
    for (i, &kind) in sig.arg_kinds.iter().enumerate() {
        if kind == TypeKind::Pointer && i == last {
            let end = raw.len().min(at + MAX_BLOB_LEN);
            values.push(TypedValue::Pointer(raw[at..end].to_vec()));
            return Ok(values);
        }
        let size = kind.byte_size();
        if raw.len() < at + size {
            return Err(mismatch());
        }
        values.push(read_slot(kind, &raw[at..at + size]));
        at += size;
    }
    if at != raw.len() {
        return Err(mismatch());
    }
    Ok(values)
}

pub fn decode_return(sig: &ShortySignature, raw: &[u8]) -> Result<TypedValue, TraceError> {
    let kind = sig.return_kind;
    if kind == TypeKind::Pointer {
        let end = raw.len().min(MAX_BLOB_LEN);
        return Ok(TypedValue::Pointer(raw[..end].to_vec()));
    }
    let expected = kind.return_size();
    if raw.len() != expected {
        return Err(TraceError::LengthMismatch { expected, actual: raw.len() });
    }
    Ok(read_slot(kind, raw))
}

pub fn encode_args(values: &[TypedValue], is_static: bool) -> Result<Vec<u8>, TraceError> {
    let mut out = Vec::with_capacity(
        RECEIVER_LEN + values.iter().map(|v| v.kind().byte_size()).sum::<usize>(),
    );
    if !is_static {
        out.extend_from_slice(&[0u8; RECEIVER_LEN]);
    }
    let last = values.len().saturating_sub(1);
    for (i, v) in values.iter().enumerate() {
        match v {
            TypedValue::Void => return Err(TraceError::VoidArgument { position: i + 1 }),
            TypedValue::Pointer(b) if i == last && b.len() > MAX_BLOB_LEN => {
                return Err(TraceError::BlobTooLarge { len: b.len() })
            }
            TypedValue::Pointer(b) if i != last && b.len() != 4 => {
                return Err(TraceError::HandleWidth { position: i + 1, len: b.len() })
            }
            _ => v.write_slot(&mut out),
        }
    }
    Ok(out)
}

pub fn encode_return(value: &TypedValue) -> Result<Vec<u8>, TraceError> {
    if let TypedValue::Pointer(b) = value {
        if b.len() > MAX_BLOB_LEN {
            return Err(TraceError::BlobTooLarge { len: b.len() });
        }
    }
    let mut out = Vec::with_capacity(8);
    value.write_slot(&mut out);
    Ok(out)
}

/// Shorty string matching a list of argument values and a return value.
pub fn signature_of(ret: &TypedValue, args: &[TypedValue]) -> ShortySignature {
    ShortySignature {
        return_kind: ret.kind(),
        arg_kinds: args.iter().map(TypedValue::kind).collect(),
    }
}
