use std::collections::BTreeMap;

use crate::graph::{ModelGraph, NodeId};

use super::matcher::find_matches;
use super::pattern::{AttrConstraint, Comparator, Pattern};

/// Graph isomorphism up to node/edge ids and source lines: same node types
/// and attribute maps, same labelled edge multiset.
pub fn is_isomorphic(a: &ModelGraph, b: &ModelGraph) -> bool {
    if a.node_count() != b.node_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let key = |id: NodeId| format!("n{}", id.0);
    let mut pattern = Pattern::new();
    for n in a.nodes() {
        let constraints = n
            .attrs
            .iter()
            .map(|(k, v)| AttrConstraint::new(k, Comparator::Eq, v.clone()))
            .collect();
        pattern = pattern.node_with(&key(n.id), &n.ty, constraints);
    }
    let mut seen = std::collections::HashSet::new();
    for e in a.edges() {
        if seen.insert((e.label.clone(), e.src, e.dst)) {
            pattern = pattern.edge(&e.label, &key(e.src), &key(e.dst));
        }
    }
    let b_edges = edge_multiset(b, |id| id);
    find_matches(&pattern, b).into_iter().any(|m| {
        let exact_attrs = a.nodes().all(|n| {
            let image = m.get(&key(n.id)).and_then(|id| b.node(id));
            image.is_some_and(|h| h.attrs == n.attrs)
        });
        exact_attrs && edge_multiset(a, |id| m.get(&key(id)).unwrap_or(NodeId(u32::MAX))) == b_edges
    })
}

fn edge_multiset(
    g: &ModelGraph,
    map: impl Fn(NodeId) -> NodeId,
) -> BTreeMap<(String, NodeId, NodeId), usize> {
    let mut out = BTreeMap::new();
    for e in g.edges() {
        *out.entry((e.label.clone(), map(e.src), map(e.dst)))
            .or_default() += 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::AttrValue;

    fn chain(order_flip: bool, dim: i64) -> ModelGraph {
        let mut g = ModelGraph::new();
        let (d, q) = if order_flip {
            let q = g.add_node(
                "QNetwork",
                [("outputDim".into(), AttrValue::Int(dim))],
                Some(9),
            );
            (g.add_node("DQN", [], None), q)
        } else {
            let d = g.add_node("DQN", [], Some(2));
            (
                d,
                g.add_node(
                    "QNetwork",
                    [("outputDim".into(), AttrValue::Int(dim))],
                    None,
                ),
            )
        };
        g.add_edge("owns", d, q);
        g
    }

    #[test]
    fn ignores_ids_and_lines() {
        assert!(is_isomorphic(&chain(false, 2), &chain(true, 2)));
    }

    #[test]
    fn attribute_values_matter() {
        assert!(!is_isomorphic(&chain(false, 2), &chain(true, 3)));
        let mut extra = chain(true, 2);
        extra.set_attr(NodeId(0), "outputActivation", AttrValue::from("linear"));
        assert!(!is_isomorphic(&chain(false, 2), &extra));
    }
}
