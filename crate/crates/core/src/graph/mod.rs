//! Typed attributed graphs: the DRL meta-model, host graphs, and
//! conformance checking of the latter against the former.

mod conform;
mod meta;
mod model;
mod type_graph;

pub use conform::{conforms_to, ConformanceViolation};
pub use meta::{drl_meta_model, edge_label, node_type};
pub use model::{add_fault_node, Edge, EdgeId, ModelGraph, Node, NodeId};
pub use type_graph::{EdgeType, TypeGraph, TypeGraphBuilder};

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph has no DRLProgram node")]
    MissingProgramNode,
    #[error("invalid type graph: {0}")]
    InvalidTypeGraph(String),
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("duplicate edge id {0}")]
    DuplicateEdgeId(EdgeId),
    #[error("malformed model graph JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// The value domains an attribute may be declared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttrKind {
    Integer,
    Real,
    Boolean,
    String,
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrKind::Integer => "integer",
            AttrKind::Real => "real",
            AttrKind::Boolean => "boolean",
            AttrKind::String => "string",
        })
    }
}

/// An attribute value. Serialized untagged, so JSON `2` reads back as an
/// integer and `2.0` as a real.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttrValue {
    Int(i64),
    Real(f64),
    Bool(bool),
    Str(String),
}

impl AttrValue {
    pub fn kind(&self) -> AttrKind {
        match self {
            AttrValue::Int(_) => AttrKind::Integer,
            AttrValue::Real(_) => AttrKind::Real,
            AttrValue::Bool(_) => AttrKind::Boolean,
            AttrValue::Str(_) => AttrKind::String,
        }
    }

    /// Numeric view; integers widen to reals.
    pub fn as_f64(&self) -> Option<f64> {
        match *self {
            AttrValue::Int(i) => Some(i as f64),
            AttrValue::Real(r) => Some(r),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            AttrValue::Str(s) => Some(s),
            _ => None,
        }
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Int(i) => write!(f, "{i}"),
            AttrValue::Real(r) => write!(f, "{r}"),
            AttrValue::Bool(b) => write!(f, "{b}"),
            AttrValue::Str(s) => f.write_str(s),
        }
    }
}

impl From<i64> for AttrValue {
    fn from(v: i64) -> Self {
        AttrValue::Int(v)
    }
}

impl From<f64> for AttrValue {
    fn from(v: f64) -> Self {
        AttrValue::Real(v)
    }
}

impl From<bool> for AttrValue {
    fn from(v: bool) -> Self {
        AttrValue::Bool(v)
    }
}

impl From<&str> for AttrValue {
    fn from(v: &str) -> Self {
        AttrValue::Str(v.to_string())
    }
}

impl From<String> for AttrValue {
    fn from(v: String) -> Self {
        AttrValue::Str(v)
    }
}
