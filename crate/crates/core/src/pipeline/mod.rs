//! Pipeline layer: a hybrid call graph built from runtime stacks, declared
//! static edges and resolved native jumps, and the input-to-sink slice
//! around a detected ML function.

mod graph;
mod slice;

pub use graph::{build_call_graph, resolve_jump, CallGraph, GraphDump, UnresolvedJump};
pub use slice::{completeness_check, slice_pipeline, CompletenessReport, PipelineSlice};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PipelineError {
    #[error("anchor {0} is not a node of the call graph")]
    AnchorNotFound(NodeId),
}

/// `name` for Java-layer functions, `name@library` for native ones.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub String);

impl NodeId {
    pub fn new(name: &str, library: Option<&str>) -> Self {
        match library {
            Some(lib) => NodeId(format!("{name}@{lib}")),
            None => NodeId(name.to_owned()),
        }
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for NodeId {
    fn from(s: &str) -> Self {
        NodeId(s.to_owned())
    }
}

/// A parsed stack frame: `name`, `name@lib` or `name@lib+0xOFF`, where the
/// offset is the function's entry within the library.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    pub name: String,
    pub library: Option<String>,
    pub offset: Option<u64>,
}

impl Frame {
    pub fn parse(s: &str) -> Frame {
        let (head, offset) = match s.rsplit_once("+0x") {
            Some((h, hex)) => match u64::from_str_radix(hex, 16) {
                Ok(off) => (h, Some(off)),
                Err(_) => (s, None),
            },
            None => (s, None),
        };
        match head.rsplit_once('@') {
            Some((name, lib)) if !name.is_empty() && !lib.is_empty() => Frame {
                name: name.to_owned(),
                library: Some(lib.to_owned()),
                offset,
            },
            _ => Frame { name: head.to_owned(), library: None, offset },
        }
    }

    pub fn id(&self) -> NodeId {
        NodeId::new(&self.name, self.library.as_deref())
    }
}

impl fmt::Display for Frame {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(lib) = &self.library {
            write!(f, "@{lib}")?;
        }
        if let Some(off) = self.offset {
            write!(f, "+{off:#x}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layer {
    Java,
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    InputSource,
    Preprocess,
    ModelEntry,
    OutputRegister,
    Callback,
    Sink,
}

impl Role {
    pub fn is_ml(self) -> bool {
        matches!(self, Role::ModelEntry | Role::OutputRegister)
    }
}

/// Analyst-supplied roles, keyed by node id. Stored as JSON
/// `{"node": ["input_source", ...]}`.
pub type RoleMap = BTreeMap<NodeId, BTreeSet<Role>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionNode {
    pub id: NodeId,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<String>,
    pub layer: Layer,
    pub exported: bool,
    pub roles: BTreeSet<Role>,
    #[serde(default, skip_serializing_if = "Option::is_none", with = "hex_opt")]
    pub offset: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_seen_ts: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    Static,
    StackObserved,
    DynamicJump,
    Jni,
    NativeCallback,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CallEdge {
    pub from: NodeId,
    pub to: NodeId,
    #[serde(default = "static_kind")]
    pub kind: EdgeKind,
    #[serde(default)]
    pub support: u64,
}

fn static_kind() -> EdgeKind {
    EdgeKind::Static
}

/// One observed indirect branch inside a native library. Offsets are
/// relative to the library base.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct JumpRecord {
    pub library: String,
    #[serde(with = "hex")]
    pub branch_offset: u64,
    #[serde(with = "hex")]
    pub dest_offset: u64,
    #[serde(default = "one")]
    pub observations: u64,
}

fn one() -> u64 {
    1
}

mod hex {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::trace::format_offset(*v))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        crate::trace::parse_offset(&s)
            .ok_or_else(|| serde::de::Error::custom(format!("bad hex offset {s:?}")))
    }
}

mod hex_opt {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &Option<u64>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(v) => super::hex::serialize(v, s),
            None => s.serialize_none(),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<u64>, D::Error> {
        Option::<String>::deserialize(d)?
            .map(|s| {
                crate::trace::parse_offset(&s)
                    .ok_or_else(|| serde::de::Error::custom(format!("bad hex offset {s:?}")))
            })
            .transpose()
    }
}
