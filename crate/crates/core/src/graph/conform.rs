use std::fmt;

use super::meta::node_type;
use super::{AttrKind, EdgeId, ModelGraph, NodeId, TypeGraph};

/// One way a host graph fails to be typed by a type graph.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum ConformanceViolation {
    UnknownNodeType {
        node: NodeId,
        node_type: String,
    },
    UnknownAttribute {
        node: NodeId,
        attr: String,
    },
    AttributeKind {
        node: NodeId,
        attr: String,
        expected: AttrKind,
        found: AttrKind,
    },
    UnknownEdgeLabel {
        edge: EdgeId,
        label: String,
    },
    /// The label exists, but not between these endpoint types.
    EdgeDirection {
        edge: EdgeId,
        label: String,
        source_type: String,
        target_type: String,
    },
    DanglingEdge {
        edge: EdgeId,
        missing: NodeId,
    },
    MultipleProgramNodes {
        nodes: Vec<NodeId>,
    },
}

impl fmt::Display for ConformanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        use ConformanceViolation::*;
        match self {
            UnknownNodeType { node, node_type } => {
                write!(f, "{node}: unknown node type {node_type}")
            }
            UnknownAttribute { node, attr } => write!(f, "{node}: undeclared attribute {attr}"),
            AttributeKind {
                node,
                attr,
                expected,
                found,
            } => write!(
                f,
                "{node}: attribute {attr} is {found}, expected {expected}"
            ),
            UnknownEdgeLabel { edge, label } => write!(f, "{edge}: unknown edge label {label}"),
            EdgeDirection {
                edge,
                label,
                source_type,
                target_type,
            } => write!(
                f,
                "{edge}: {label} is not allowed from {source_type} to {target_type}"
            ),
            DanglingEdge { edge, missing } => {
                write!(f, "{edge}: endpoint {missing} does not exist")
            }
            MultipleProgramNodes { nodes } => {
                write!(f, "{} DRLProgram nodes, at most one allowed", nodes.len())
            }
        }
    }
}

/// Checks that every node, attribute and edge of `host` is typed by `tg`.
/// The result is sorted, so it does not depend on insertion order.
pub fn conforms_to(host: &ModelGraph, tg: &TypeGraph) -> Vec<ConformanceViolation> {
    use ConformanceViolation::*;
    let mut out = Vec::new();

    for node in host.nodes() {
        let Some(schema) = tg.attributes(&node.ty) else {
            out.push(UnknownNodeType {
                node: node.id,
                node_type: node.ty.clone(),
            });
            continue;
        };
        for (name, value) in &node.attrs {
            match schema.get(name) {
                None => out.push(UnknownAttribute {
                    node: node.id,
                    attr: name.clone(),
                }),
                Some(&expected) if expected != value.kind() => out.push(AttributeKind {
                    node: node.id,
                    attr: name.clone(),
                    expected,
                    found: value.kind(),
                }),
                Some(_) => {}
            }
        }
    }

    for edge in host.edges() {
        let src = host.node(edge.src);
        let dst = host.node(edge.dst);
        if src.is_none() {
            out.push(DanglingEdge {
                edge: edge.id,
                missing: edge.src,
            });
        }
        if dst.is_none() {
            out.push(DanglingEdge {
                edge: edge.id,
                missing: edge.dst,
            });
        }
        if !tg.has_label(&edge.label) {
            out.push(UnknownEdgeLabel {
                edge: edge.id,
                label: edge.label.clone(),
            });
            continue;
        }
        if let (Some(s), Some(d)) = (src, dst) {
            if !tg.has_edge_type(&edge.label, &s.ty, &d.ty) {
                out.push(EdgeDirection {
                    edge: edge.id,
                    label: edge.label.clone(),
                    source_type: s.ty.clone(),
                    target_type: d.ty.clone(),
                });
            }
        }
    }

    let programs: Vec<NodeId> = host
        .nodes_of_type(node_type::PROGRAM)
        .map(|n| n.id)
        .collect();
    if programs.len() > 1 {
        out.push(MultipleProgramNodes { nodes: programs });
    }

    out.sort();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{add_fault_node, drl_meta_model, AttrValue};

    #[test]
    fn empty_graph_conforms() {
        assert!(conforms_to(&ModelGraph::new(), drl_meta_model()).is_empty());
    }

    #[test]
    fn string_where_integer_declared() {
        let mut g = ModelGraph::new();
        let env = g.add_node(
            "Environment",
            [("numActions".to_string(), AttrValue::from("two"))],
            None,
        );
        assert_eq!(
            conforms_to(&g, drl_meta_model()),
            vec![ConformanceViolation::AttributeKind {
                node: env,
                attr: "numActions".into(),
                expected: AttrKind::Integer,
                found: AttrKind::String,
            }]
        );
    }

    #[test]
    fn reversed_followed_by_edge() {
        let mut g = ModelGraph::new();
        let step = g.add_node("Step", [], None);
        let init = g.add_node("Initialize", [], None);
        let e = g.add_edge("followedBy", step, init);
        let v = conforms_to(&g, drl_meta_model());
        assert_eq!(
            v,
            vec![ConformanceViolation::EdgeDirection {
                edge: e,
                label: "followedBy".into(),
                source_type: "Step".into(),
                target_type: "Initialize".into(),
            }]
        );
    }

    /// Every (label, src, dst) triple over the meta-model's types is
    /// accepted exactly when it appears in the edge table.
    #[test]
    fn edge_checks_agree_with_exhaustive_table_lookup() {
        let tg = drl_meta_model();
        let types: Vec<&str> = tg.node_types().collect();
        let labels: Vec<String> = {
            let mut l: Vec<String> = tg.edge_types().map(|e| e.label.clone()).collect();
            l.dedup();
            l
        };
        for label in &labels {
            for s in &types {
                for d in &types {
                    let mut g = ModelGraph::new();
                    let a = g.add_node(s, [], None);
                    let b = g.add_node(d, [], None);
                    g.add_edge(label, a, b);
                    let listed = tg
                        .edge_types()
                        .any(|e| &e.label == label && e.source == *s && e.target == *d);
                    assert_eq!(conforms_to(&g, tg).is_empty(), listed, "{label} {s}->{d}");
                }
            }
        }
    }

    #[test]
    fn multiple_program_nodes_and_unknowns() {
        let mut g = ModelGraph::new();
        g.add_node("DRLProgram", [], None);
        g.add_node("DRLProgram", [], None);
        let w = g.add_node("Widget", [], None);
        let s = g.add_node("Step", [("speed".to_string(), AttrValue::Int(3))], None);
        let e = g.add_edge("teleports", s, NodeId(99));
        let v = conforms_to(&g, drl_meta_model());
        assert_eq!(v.len(), 5);
        assert!(v.contains(&ConformanceViolation::UnknownNodeType {
            node: w,
            node_type: "Widget".into()
        }));
        assert!(v.contains(&ConformanceViolation::DanglingEdge {
            edge: e,
            missing: NodeId(99)
        }));
    }

    #[test]
    fn flagging_preserves_conformance() {
        let mut g = ModelGraph::new();
        let p = g.add_node("DRLProgram", [], None);
        let e = g.add_node("Environment", [], None);
        g.add_edge("hasEnv", p, e);
        let out = add_fault_node(&g, "F03", "m", None).unwrap();
        assert!(conforms_to(&out, drl_meta_model()).is_empty());
    }
}
