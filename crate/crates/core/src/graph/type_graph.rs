use std::collections::{BTreeMap, BTreeSet};

use super::{AttrKind, GraphError};

/// An edge type: a label together with the node types it may connect.
/// The same label may appear with several source/target pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeType {
    pub label: String,
    pub source: String,
    pub target: String,
}

/// Node and edge vocabulary with per-node-type attribute schemas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeGraph {
    node_types: BTreeMap<String, BTreeMap<String, AttrKind>>,
    edge_types: BTreeSet<EdgeType>,
}

impl TypeGraph {
    pub fn builder() -> TypeGraphBuilder {
        TypeGraphBuilder::default()
    }

    pub fn has_node_type(&self, ty: &str) -> bool {
        self.node_types.contains_key(ty)
    }

    pub fn node_types(&self) -> impl Iterator<Item = &str> {
        self.node_types.keys().map(String::as_str)
    }

    pub fn attributes(&self, ty: &str) -> Option<&BTreeMap<String, AttrKind>> {
        self.node_types.get(ty)
    }

    pub fn attr_kind(&self, ty: &str, attr: &str) -> Option<AttrKind> {
        self.node_types.get(ty)?.get(attr).copied()
    }

    pub fn edge_types(&self) -> impl Iterator<Item = &EdgeType> {
        self.edge_types.iter()
    }

    pub fn has_label(&self, label: &str) -> bool {
        self.edge_types.iter().any(|e| e.label == label)
    }

    pub fn has_edge_type(&self, label: &str, source: &str, target: &str) -> bool {
        self.edge_types.contains(&EdgeType {
            label: label.to_string(),
            source: source.to_string(),
            target: target.to_string(),
        })
    }
}

#[derive(Debug, Default)]
pub struct TypeGraphBuilder {
    nodes: Vec<(String, Vec<(String, AttrKind)>)>,
    edges: Vec<EdgeType>,
}

impl TypeGraphBuilder {
    pub fn node(mut self, ty: &str, attrs: &[(&str, AttrKind)]) -> Self {
        self.nodes.push((
            ty.to_string(),
            attrs.iter().map(|(n, k)| (n.to_string(), *k)).collect(),
        ));
        self
    }

    pub fn edge(mut self, label: &str, source: &str, target: &str) -> Self {
        self.edges.push(EdgeType {
            label: label.to_string(),
            source: source.to_string(),
            target: target.to_string(),
        });
        self
    }

    pub fn build(self) -> Result<TypeGraph, GraphError> {
        let mut node_types = BTreeMap::new();
        for (ty, attrs) in self.nodes {
            let mut schema = BTreeMap::new();
            for (name, kind) in attrs {
                if schema.insert(name.clone(), kind).is_some() {
                    return Err(GraphError::InvalidTypeGraph(format!(
                        "attribute {name} declared twice on {ty}"
                    )));
                }
            }
            if node_types.insert(ty.clone(), schema).is_some() {
                return Err(GraphError::InvalidTypeGraph(format!(
                    "node type {ty} declared twice"
                )));
            }
        }
        let mut edge_types = BTreeSet::new();
        for e in self.edges {
            for end in [&e.source, &e.target] {
                if !node_types.contains_key(end) {
                    return Err(GraphError::InvalidTypeGraph(format!(
                        "edge type {} refers to undeclared node type {end}",
                        e.label
                    )));
                }
            }
            if !edge_types.insert(e.clone()) {
                return Err(GraphError::InvalidTypeGraph(format!(
                    "edge type {} {}->{} declared twice",
                    e.label, e.source, e.target
                )));
            }
        }
        Ok(TypeGraph {
            node_types,
            edge_types,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_edge_to_undeclared_type() {
        let err = TypeGraph::builder()
            .node("A", &[])
            .edge("e", "A", "B")
            .build()
            .unwrap_err();
        assert!(err.to_string().contains("undeclared node type B"));
    }

    #[test]
    fn rejects_duplicate_attribute() {
        let err = TypeGraph::builder()
            .node("A", &[("x", AttrKind::Integer), ("x", AttrKind::Real)])
            .build()
            .unwrap_err();
        assert!(matches!(err, GraphError::InvalidTypeGraph(_)));
    }

    #[test]
    fn same_label_between_different_pairs() {
        let tg = TypeGraph::builder()
            .node("A", &[])
            .node("B", &[])
            .node("C", &[])
            .edge("owns", "A", "B")
            .edge("owns", "A", "C")
            .build()
            .unwrap();
        assert!(tg.has_edge_type("owns", "A", "C"));
        assert!(!tg.has_edge_type("owns", "B", "C"));
    }
}
