use std::fmt;
use std::str::FromStr;

use super::TraceError;

/// Value categories that can appear in a shorty string.
///
/// Every kind occupies four bytes in the argument array except `Long` and
/// `Double`, which occupy eight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TypeKind {
    Void,
    Bool,
    Byte,
    Short,
    Char,
    Int,
    Long,
    Float,
    Double,
    Pointer,
}

impl TypeKind {
    pub const ALL: [TypeKind; 10] = [
        TypeKind::Void,
        TypeKind::Bool,
        TypeKind::Byte,
        TypeKind::Short,
        TypeKind::Char,
        TypeKind::Int,
        TypeKind::Long,
        TypeKind::Float,
        TypeKind::Double,
        TypeKind::Pointer,
    ];

    pub fn from_char(c: char) -> Option<Self> {
        Some(match c {
            'V' => TypeKind::Void,
            'Z' => TypeKind::Bool,
            'B' => TypeKind::Byte,
            'S' => TypeKind::Short,
            'C' => TypeKind::Char,
            'I' => TypeKind::Int,
            'J' => TypeKind::Long,
            'F' => TypeKind::Float,
            'D' => TypeKind::Double,
            'L' => TypeKind::Pointer,
            _ => return None,
        })
    }

    pub fn as_char(self) -> char {
        match self {
            TypeKind::Void => 'V',
            TypeKind::Bool => 'Z',
            TypeKind::Byte => 'B',
            TypeKind::Short => 'S',
            TypeKind::Char => 'C',
            TypeKind::Int => 'I',
            TypeKind::Long => 'J',
            TypeKind::Float => 'F',
            TypeKind::Double => 'D',
            TypeKind::Pointer => 'L',
        }
    }

    /// Slot width in the raw argument array.
    pub fn byte_size(self) -> usize {
        match self {
            TypeKind::Long | TypeKind::Double => 8,
            _ => 4,
        }
    }

    /// Width of a logged return value. `Void` carries no bytes.
    pub fn return_size(self) -> usize {
        match self {
            TypeKind::Void => 0,
            other => other.byte_size(),
        }
    }
}

impl fmt::Display for TypeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Parsed form of a shorty such as `IIJ`: the first character is the return
/// type, the rest are the argument types in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ShortySignature {
    pub return_kind: TypeKind,
    pub arg_kinds: Vec<TypeKind>,
}

impl ShortySignature {
    /// Bytes occupied by the arguments when every slot has its fixed width.
    pub fn fixed_args_size(&self) -> usize {
        self.arg_kinds.iter().map(|k| k.byte_size()).sum()
    }

    /// True when the last argument is an object pointer, which is captured as
    /// a variable-length blob instead of a 4-byte handle.
    pub fn has_trailing_blob(&self) -> bool {
        self.arg_kinds.last() == Some(&TypeKind::Pointer)
    }
}

impl fmt::Display for ShortySignature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.return_kind)?;
        for k in &self.arg_kinds {
            write!(f, "{k}")?;
        }
        Ok(())
    }
}

impl FromStr for ShortySignature {
    type Err = TraceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_shorty(s)
    }
}

pub fn parse_shorty(s: &str) -> Result<ShortySignature, TraceError> {
    let mut chars = s.chars().enumerate();
    let (_, first) = chars.next().ok_or(TraceError::EmptyShorty)?;
    let return_kind = TypeKind::from_char(first)
        .ok_or(TraceError::UnknownShortyChar { ch: first, position: 0 })?;
    let arg_kinds = chars
        .map(|(position, ch)| match TypeKind::from_char(ch) {
            None => Err(TraceError::UnknownShortyChar { ch, position }),
            Some(TypeKind::Void) => Err(TraceError::VoidArgument { position }),
            Some(kind) => Ok(kind),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShortySignature { return_kind, arg_kinds })
}
