use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::meta::{edge_label, node_type};
use super::{AttrValue, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default)]
    pub attrs: BTreeMap<String, AttrValue>,
    /// 1-based source line of the construct this node was extracted from.
    #[serde(default)]
    pub line: Option<u32>,
}

impl Node {
    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attrs.get(name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub id: EdgeId,
    pub label: String,
    pub src: NodeId,
    pub dst: NodeId,
}

/// An attributed host graph. Node and edge maps are keyed by id, so
/// iteration and serialization order is by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ModelGraph {
    nodes: BTreeMap<NodeId, Node>,
    edges: BTreeMap<EdgeId, Edge>,
}

#[derive(Serialize, Deserialize)]
struct Wire {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
}

impl ModelGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(
        &mut self,
        ty: &str,
        attrs: impl IntoIterator<Item = (String, AttrValue)>,
        line: Option<u32>,
    ) -> NodeId {
        let id = NodeId(self.nodes.keys().next_back().map_or(0, |n| n.0 + 1));
        self.nodes.insert(
            id,
            Node {
                id,
                ty: ty.to_string(),
                attrs: attrs.into_iter().collect(),
                line,
            },
        );
        id
    }

    pub fn add_edge(&mut self, label: &str, src: NodeId, dst: NodeId) -> EdgeId {
        let id = EdgeId(self.edges.keys().next_back().map_or(0, |e| e.0 + 1));
        self.edges.insert(
            id,
            Edge {
                id,
                label: label.to_string(),
                src,
                dst,
            },
        );
        id
    }

    /// Inserts a node with a caller-chosen id.
    pub fn insert_node(&mut self, node: Node) -> Result<(), GraphError> {
        if self.nodes.contains_key(&node.id) {
            return Err(GraphError::DuplicateNodeId(node.id));
        }
        self.nodes.insert(node.id, node);
        Ok(())
    }

    pub fn insert_edge(&mut self, edge: Edge) -> Result<(), GraphError> {
        if self.edges.contains_key(&edge.id) {
            return Err(GraphError::DuplicateEdgeId(edge.id));
        }
        self.edges.insert(edge.id, edge);
        Ok(())
    }

    pub fn set_attr(&mut self, id: NodeId, name: &str, value: AttrValue) {
        if let Some(n) = self.nodes.get_mut(&id) {
            n.attrs.insert(name.to_string(), value);
        }
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(&id)
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = &Node> {
        self.nodes.values()
    }

    pub fn edges(&self) -> impl DoubleEndedIterator<Item = &Edge> {
        self.edges.values()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes_of_type<'a>(&'a self, ty: &'a str) -> impl Iterator<Item = &'a Node> + 'a {
        self.nodes.values().filter(move |n| n.ty == ty)
    }

    pub fn has_edge(&self, label: &str, src: NodeId, dst: NodeId) -> bool {
        self.edges
            .values()
            .any(|e| e.src == src && e.dst == dst && e.label == label)
    }

    pub fn out_edges(&self, src: NodeId) -> impl Iterator<Item = &Edge> {
        self.edges.values().filter(move |e| e.src == src)
    }

    /// The lowest-id DRLProgram node, if any.
    pub fn program_node(&self) -> Option<NodeId> {
        self.nodes_of_type(node_type::PROGRAM).next().map(|n| n.id)
    }

    /// Appends a Fault node flagged from the program node.
    pub fn push_fault(
        &mut self,
        code: &str,
        message: &str,
        anchor: Option<u32>,
    ) -> Result<NodeId, GraphError> {
        let program = self.program_node().ok_or(GraphError::MissingProgramNode)?;
        let fault = self.add_node(
            node_type::FAULT,
            [
                ("code".to_string(), AttrValue::from(code)),
                ("message".to_string(), AttrValue::from(message)),
            ],
            anchor,
        );
        self.add_edge(edge_label::FLAGGED, program, fault);
        Ok(fault)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.wire()).expect("model graph serializes")
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(self.wire()).expect("model graph serializes")
    }

    fn wire(&self) -> Wire {
        Wire {
            nodes: self.nodes.values().cloned().collect(),
            edges: self.edges.values().cloned().collect(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let wire: Wire = serde_json::from_str(text)?;
        let mut g = ModelGraph::new();
        for n in wire.nodes {
            g.insert_node(n)?;
        }
        for e in wire.edges {
            g.insert_edge(e)?;
        }
        Ok(g)
    }
}

/// Returns `host` plus one Fault node carrying `code` and `message`, linked
/// from the program node by a `flagged` edge.
pub fn add_fault_node(
    host: &ModelGraph,
    code: &str,
    message: &str,
    anchor: Option<u32>,
) -> Result<ModelGraph, GraphError> {
    let mut g = host.clone();
    g.push_fault(code, message, anchor)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{conforms_to, drl_meta_model};

    fn clean_program() -> ModelGraph {
        let mut g = ModelGraph::new();
        let p = g.add_node("DRLProgram", [], Some(1));
        let e = g.add_node("Environment", [], Some(3));
        g.add_edge("hasEnv", p, e);
        g
    }

    #[test]
    fn add_fault_node_adds_one_flagged_fault() {
        let g = clean_program();
        let out = add_fault_node(&g, "F03", "missing env close", Some(3)).unwrap();
        let faults: Vec<_> = out.nodes_of_type("Fault").collect();
        assert_eq!(faults.len(), 1);
        assert_eq!(faults[0].attr("code"), Some(&AttrValue::from("F03")));
        assert_eq!(faults[0].line, Some(3));
        assert!(out.has_edge("flagged", NodeId(0), faults[0].id));
        for n in g.nodes() {
            assert_eq!(out.node(n.id), Some(n));
        }
    }

    #[test]
    fn add_fault_node_is_non_destructive() {
        let g = add_fault_node(&clean_program(), "F03", "a", None).unwrap();
        let g = add_fault_node(&g, "F04", "b", None).unwrap();
        let codes: Vec<_> = g
            .nodes_of_type("Fault")
            .map(|n| n.attr("code").unwrap().to_string())
            .collect();
        assert_eq!(codes, ["F03", "F04"]);
        assert!(conforms_to(&g, drl_meta_model()).is_empty());
    }

    #[test]
    fn add_fault_node_requires_program() {
        let err = add_fault_node(&ModelGraph::new(), "F01", "x", None).unwrap_err();
        assert!(matches!(err, GraphError::MissingProgramNode));
    }

    #[test]
    fn json_layout_is_sorted_and_typed() {
        let mut g = ModelGraph::new();
        let p = g.add_node("DRLProgram", [], None);
        let x = g.add_node(
            "Exploration",
            [
                ("epsilon".to_string(), AttrValue::Real(1.0)),
                ("decay".to_string(), AttrValue::Real(0.995)),
            ],
            Some(7),
        );
        g.add_edge("hasAgent", p, x);
        let text = serde_json::to_string(&g.to_json_value()).unwrap();
        assert_eq!(
            text,
            r#"{"edges":[{"dst":1,"id":0,"label":"hasAgent","src":0}],"nodes":[{"attrs":{},"id":0,"line":null,"type":"DRLProgram"},{"attrs":{"decay":0.995,"epsilon":1.0},"id":1,"line":7,"type":"Exploration"}]}"#
        );
        let back = ModelGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn from_json_rejects_duplicate_ids() {
        let text = r#"{"nodes":[{"id":0,"type":"Step"},{"id":0,"type":"Step"}],"edges":[]}"#;
        assert!(matches!(
            ModelGraph::from_json(text),
            Err(GraphError::DuplicateNodeId(NodeId(0)))
        ));
    }
}
