//! Shared helpers for the integration tests: corpus access, random typed
//! graphs and a brute-force matcher used as an oracle.
#![allow(dead_code)]

use std::collections::BTreeSet;
use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;

use drlint::corpus::{FixtureKind, Manifest};
use drlint::engine::{AttrConstraint, Comparator, Operand, Pattern};
use drlint::extract::SourceUnit;
use drlint::graph::{drl_meta_model, node_type, AttrKind, AttrValue, ModelGraph, Node, NodeId};

pub fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_root() -> PathBuf {
    crate_dir().join("../../corpus")
}

pub fn fixtures_dir() -> PathBuf {
    crate_dir().join("tests/fixtures")
}

pub fn golden_dir() -> PathBuf {
    crate_dir().join("tests/golden")
}

pub fn manifest() -> Manifest {
    Manifest::load(&corpus_root().join("manifest.json")).expect("corpus manifest loads")
}

/// A source file with a stable display name (its path relative to the
/// corpus or fixtures root), so reports do not depend on the checkout path.
pub fn source(root: &std::path::Path, rel: &str) -> SourceUnit {
    let text = std::fs::read_to_string(root.join(rel)).unwrap_or_else(|e| panic!("{rel}: {e}"));
    SourceUnit::new(rel, text)
}

pub fn corpus_source(rel: &str) -> SourceUnit {
    source(&corpus_root(), rel)
}

pub fn fixture_source(rel: &str) -> SourceUnit {
    let mut s = source(&fixtures_dir(), rel);
    s.path = format!("fixtures/{rel}");
    s
}

/// Extra fixtures and the codes each must produce.
pub const EXTRA_FIXTURES: [(&str, &[&str]); 3] = [
    ("two_unguarded_steps.py", &["F02", "F02"]),
    ("close_and_softmax.py", &["F03", "F11"]),
    ("so50308750_closed.py", &[]),
];

/// Every corpus entry followed by every extra fixture.
pub fn all_sources() -> Vec<SourceUnit> {
    let m = manifest();
    let mut out: Vec<SourceUnit> = m.entries.iter().map(|e| corpus_source(&e.path)).collect();
    out.extend(EXTRA_FIXTURES.iter().map(|(f, _)| fixture_source(f)));
    out
}

pub fn entries_of(kind: FixtureKind) -> Vec<drlint::corpus::ManifestEntry> {
    manifest().of_kind(kind).cloned().collect()
}

const INTS: [i64; 3] = [1, 2, 3];
const REALS: [f64; 4] = [0.5, 1.0, 1.5, 2.0];
const STRS: [&str; 2] = ["linear", "softmax"];

fn random_value(rng: &mut impl Rng, kind: AttrKind) -> AttrValue {
    match kind {
        AttrKind::Integer => AttrValue::Int(*INTS.choose(rng).unwrap()),
        AttrKind::Real => AttrValue::Real(*REALS.choose(rng).unwrap()),
        AttrKind::Boolean => AttrValue::Bool(rng.gen()),
        AttrKind::String => AttrValue::Str(STRS.choose(rng).unwrap().to_string()),
    }
}

/// Up to four node types to draw from, so that random patterns often match.
pub fn random_type_pool(rng: &mut impl Rng) -> Vec<&'static str> {
    let mut all: Vec<&'static str> = node_type::ALL.to_vec();
    all.shuffle(rng);
    let k = rng.gen_range(1..=4);
    all.truncate(k);
    all
}

fn attr_schema(ty: &str) -> Vec<(String, AttrKind)> {
    drl_meta_model()
        .attributes(ty)
        .map(|m| m.iter().map(|(n, k)| (n.clone(), *k)).collect())
        .unwrap_or_default()
}

fn edge_labels_between(src: &str, dst: &str) -> Vec<String> {
    drl_meta_model()
        .edge_types()
        .filter(|e| e.source == src && e.target == dst)
        .map(|e| e.label.clone())
        .collect()
}

/// A meta-model-typed host graph with at most `max_nodes` nodes.
pub fn random_host(rng: &mut impl Rng, pool: &[&str], max_nodes: usize) -> ModelGraph {
    let mut g = ModelGraph::new();
    let n = rng.gen_range(1..=max_nodes);
    for _ in 0..n {
        let ty = *pool.choose(rng).unwrap();
        let mut attrs: Vec<(String, AttrValue)> = Vec::new();
        for (name, kind) in attr_schema(ty) {
            if rng.gen_bool(0.7) {
                attrs.push((name, random_value(rng, kind)));
            }
        }
        g.add_node(ty, attrs, Some(rng.gen_range(1..50)));
    }
    let nodes: Vec<(NodeId, String)> = g.nodes().map(|n| (n.id, n.ty.clone())).collect();
    for (s, st) in &nodes {
        for (d, dt) in &nodes {
            for label in edge_labels_between(st, dt) {
                if rng.gen_bool(0.4) {
                    g.add_edge(&label, *s, *d);
                    if rng.gen_bool(0.1) {
                        g.add_edge(&label, *s, *d);
                    }
                }
            }
        }
    }
    g
}

const COMPARATORS: [Comparator; 8] = [
    Comparator::Eq,
    Comparator::Ne,
    Comparator::Lt,
    Comparator::Le,
    Comparator::Gt,
    Comparator::Ge,
    Comparator::Absent,
    Comparator::Present,
];

/// A pattern of at most `max_nodes` nodes with ids `p0`, `p1`, ...
pub fn random_pattern(rng: &mut impl Rng, pool: &[&str], max_nodes: usize) -> Pattern {
    let k = rng.gen_range(1..=max_nodes);
    let types: Vec<&str> = (0..k).map(|_| *pool.choose(rng).unwrap()).collect();
    let mut p = Pattern::new();
    for (i, ty) in types.iter().enumerate() {
        let schema = attr_schema(ty);
        let mut constraints = Vec::new();
        if !schema.is_empty() {
            for _ in 0..rng.gen_range(0..=2) {
                let (attr, kind) = schema.choose(rng).unwrap().clone();
                let op = *COMPARATORS.choose(rng).unwrap();
                let c = match op {
                    Comparator::Absent => AttrConstraint::absent(&attr),
                    Comparator::Present => AttrConstraint::present(&attr),
                    _ if rng.gen_bool(0.3) => {
                        let j = rng.gen_range(0..k);
                        match attr_schema(types[j]).choose(rng) {
                            Some((other, _)) => {
                                AttrConstraint::cross(&attr, op, &format!("p{j}"), other)
                            }
                            None => AttrConstraint::new(&attr, op, random_value(rng, kind)),
                        }
                    }
                    _ => AttrConstraint::new(&attr, op, random_value(rng, kind)),
                };
                constraints.push(c);
            }
        }
        p = p.node_with(&format!("p{i}"), ty, constraints);
    }
    for i in 0..k {
        for j in 0..k {
            for label in edge_labels_between(types[i], types[j]) {
                if rng.gen_bool(0.3) {
                    p = p.edge(&label, &format!("p{i}"), &format!("p{j}"));
                }
            }
        }
    }
    p
}

fn order(a: &AttrValue, b: &AttrValue) -> Option<std::cmp::Ordering> {
    let num = |v: &AttrValue| match v {
        AttrValue::Int(i) => Some(*i as f64),
        AttrValue::Real(r) => Some(*r),
        _ => None,
    };
    match (a, b) {
        (AttrValue::Str(x), AttrValue::Str(y)) => Some(x.cmp(y)),
        (AttrValue::Bool(x), AttrValue::Bool(y)) => Some(x.cmp(y)),
        _ => num(a)?.partial_cmp(&num(b)?),
    }
}

fn satisfied(
    c: &AttrConstraint,
    node: &Node,
    image: impl Fn(&str) -> Option<NodeId>,
    host: &ModelGraph,
) -> bool {
    use std::cmp::Ordering::*;
    let lhs = node.attrs.get(&c.attr);
    match c.op {
        Comparator::Absent => return lhs.is_none(),
        Comparator::Present => return lhs.is_some(),
        _ => {}
    }
    let rhs = match &c.operand {
        Some(Operand::Literal(v)) => Some(v),
        Some(Operand::Attr { node, attr }) => image(node)
            .and_then(|h| host.node(h))
            .and_then(|n| n.attrs.get(attr)),
        None => None,
    };
    let (Some(a), Some(b)) = (lhs, rhs) else {
        return false;
    };
    let Some(o) = order(a, b) else { return false };
    match c.op {
        Comparator::Eq => o == Equal,
        Comparator::Ne => o != Equal,
        Comparator::Lt => o == Less,
        Comparator::Le => o != Greater,
        Comparator::Gt => o == Greater,
        Comparator::Ge => o != Less,
        Comparator::Absent | Comparator::Present => unreachable!(),
    }
}

/// Every injective assignment of pattern nodes to host nodes that respects
/// types, constraints and edges, extending `fixed`. Images are listed in
/// pattern declaration order.
pub fn brute_force(
    pattern: &Pattern,
    host: &ModelGraph,
    fixed: &[(String, NodeId)],
) -> BTreeSet<Vec<NodeId>> {
    let ids: Vec<NodeId> = host.nodes().map(|n| n.id).collect();
    let k = pattern.nodes.len();
    let mut out = BTreeSet::new();
    let mut image = vec![NodeId(0); k];
    let total = ids.len().pow(k as u32);
    'next: for code in 0..total {
        let mut c = code;
        for slot in image.iter_mut() {
            *slot = ids[c % ids.len()];
            c /= ids.len();
        }
        let distinct: BTreeSet<NodeId> = image.iter().copied().collect();
        if distinct.len() != k {
            continue;
        }
        let lookup = |id: &str| {
            pattern
                .nodes
                .iter()
                .position(|n| n.id == id)
                .map(|i| image[i])
        };
        for (id, h) in fixed {
            if lookup(id) != Some(*h) {
                continue 'next;
            }
        }
        for (i, pn) in pattern.nodes.iter().enumerate() {
            let hn = host.node(image[i]).unwrap();
            if hn.ty != pn.ty {
                continue 'next;
            }
            if !pn
                .constraints
                .iter()
                .all(|c| satisfied(c, hn, lookup, host))
            {
                continue 'next;
            }
        }
        for e in &pattern.edges {
            match (lookup(&e.src), lookup(&e.dst)) {
                (Some(s), Some(d)) if host.has_edge(&e.label, s, d) => {}
                _ => continue 'next,
            }
        }
        out.insert(image.clone());
    }
    out
}
