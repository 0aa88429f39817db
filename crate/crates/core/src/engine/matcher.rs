use std::collections::{BTreeMap, HashMap, HashSet};

use crate::graph::{ModelGraph, Node, NodeId};

use super::pattern::Pattern;

/// An injective, type- and constraint-preserving mapping from pattern
/// nodes to host nodes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub rule_id: String,
    pub mapping: BTreeMap<String, NodeId>,
}

impl Match {
    pub fn get(&self, pattern_node: &str) -> Option<NodeId> {
        self.mapping.get(pattern_node).copied()
    }
}

/// Adjacency view of a host graph built once per search.
struct HostIndex<'g> {
    host: &'g ModelGraph,
    by_type: HashMap<&'g str, Vec<NodeId>>,
    out: HashMap<(NodeId, &'g str), Vec<NodeId>>,
    inc: HashMap<(NodeId, &'g str), Vec<NodeId>>,
    edges: HashSet<(&'g str, NodeId, NodeId)>,
}

impl<'g> HostIndex<'g> {
    fn new(host: &'g ModelGraph) -> Self {
        let mut by_type: HashMap<&str, Vec<NodeId>> = HashMap::new();
        for n in host.nodes() {
            by_type.entry(n.ty.as_str()).or_default().push(n.id);
        }
        let mut out: HashMap<_, Vec<NodeId>> = HashMap::new();
        let mut inc: HashMap<_, Vec<NodeId>> = HashMap::new();
        let mut edges = HashSet::new();
        for e in host.edges() {
            if edges.insert((e.label.as_str(), e.src, e.dst)) {
                out.entry((e.src, e.label.as_str()))
                    .or_default()
                    .push(e.dst);
                inc.entry((e.dst, e.label.as_str()))
                    .or_default()
                    .push(e.src);
            }
        }
        for v in out.values_mut().chain(inc.values_mut()) {
            v.sort();
        }
        Self {
            host,
            by_type,
            out,
            inc,
            edges,
        }
    }
}

/// Search state: pattern nodes are assigned in `order`; `slots[i]` holds the
/// host node chosen for `pattern.nodes[i]`.
struct Search<'p, 'g> {
    pattern: &'p Pattern,
    index: &'p HostIndex<'g>,
    pos: HashMap<&'p str, usize>,
    order: Vec<usize>,
    slots: Vec<Option<NodeId>>,
    used: HashSet<NodeId>,
    limit: Option<usize>,
    found: Vec<Vec<NodeId>>,
}

impl<'p, 'g> Search<'p, 'g> {
    fn node(&self, id: NodeId) -> &'g Node {
        self.index.host.node(id).expect("indexed node exists")
    }

    fn done(&self) -> bool {
        self.limit.is_some_and(|l| self.found.len() >= l)
    }

    /// Checks node type, unary and cross-node constraints against the
    /// already assigned part, and pattern edges to assigned neighbours.
    fn consistent(&self, pi: usize, candidate: NodeId) -> bool {
        let pnode = &self.pattern.nodes[pi];
        let host_node = self.node(candidate);
        if host_node.ty != pnode.ty {
            return false;
        }
        let assigned = |id: &str| -> Option<NodeId> {
            if let Some(&j) = self.pos.get(id) {
                if j == pi {
                    return Some(candidate);
                }
                return self.slots[j];
            }
            None
        };
        for c in &pnode.constraints {
            match c.referenced_node() {
                Some(other) => {
                    // Deferred until the referenced node is assigned.
                    let Some(o) = assigned(other) else { continue };
                    let other_node = self.node(o);
                    if !c.holds(host_node, |_| Some(other_node)) {
                        return false;
                    }
                }
                None => {
                    if !c.holds(host_node, |_| None) {
                        return false;
                    }
                }
            }
        }
        // Cross constraints declared on already assigned nodes that read
        // this one.
        for (j, other) in self.pattern.nodes.iter().enumerate() {
            let Some(oid) = self.slots[j] else { continue };
            if j == pi {
                continue;
            }
            for c in &other.constraints {
                if c.referenced_node() == Some(pnode.id.as_str())
                    && !c.holds(self.node(oid), |_| Some(host_node))
                {
                    return false;
                }
            }
        }
        for e in &self.pattern.edges {
            let (Some(s), Some(d)) = (assigned(&e.src), assigned(&e.dst)) else {
                continue;
            };
            if (e.src == pnode.id || e.dst == pnode.id)
                && !self.index.edges.contains(&(e.label.as_str(), s, d))
            {
                return false;
            }
        }
        true
    }

    fn candidates(&self, pi: usize) -> Vec<NodeId> {
        let pnode = &self.pattern.nodes[pi];
        // Prefer a neighbour list through an edge to an assigned node.
        for e in &self.pattern.edges {
            if e.src == pnode.id {
                if let Some(d) = self.pos.get(e.dst.as_str()).and_then(|&j| self.slots[j]) {
                    return self
                        .index
                        .inc
                        .get(&(d, e.label.as_str()))
                        .cloned()
                        .unwrap_or_default();
                }
            }
            if e.dst == pnode.id {
                if let Some(s) = self.pos.get(e.src.as_str()).and_then(|&j| self.slots[j]) {
                    return self
                        .index
                        .out
                        .get(&(s, e.label.as_str()))
                        .cloned()
                        .unwrap_or_default();
                }
            }
        }
        self.index
            .by_type
            .get(pnode.ty.as_str())
            .cloned()
            .unwrap_or_default()
    }

    fn run(&mut self, depth: usize) {
        if self.done() {
            return;
        }
        if depth == self.order.len() {
            let image = self.slots.iter().map(|s| s.expect("complete")).collect();
            self.found.push(image);
            return;
        }
        let pi = self.order[depth];
        if let Some(fixed) = self.slots[pi] {
            if self.consistent(pi, fixed) {
                self.run(depth + 1);
            }
            return;
        }
        for cand in self.candidates(pi) {
            if self.used.contains(&cand) || !self.consistent(pi, cand) {
                continue;
            }
            self.slots[pi] = Some(cand);
            self.used.insert(cand);
            self.run(depth + 1);
            self.used.remove(&cand);
            self.slots[pi] = None;
            if self.done() {
                return;
            }
        }
    }
}

/// Fixed nodes first, then connected nodes before disconnected ones, then
/// declaration order.
fn search_order(pattern: &Pattern, fixed: &[bool]) -> Vec<usize> {
    let n = pattern.nodes.len();
    let mut order: Vec<usize> = (0..n).filter(|&i| fixed[i]).collect();
    let mut placed: Vec<bool> = fixed.to_vec();
    while order.len() < n {
        let connected = (0..n).find(|&i| {
            !placed[i]
                && pattern.edges.iter().any(|e| {
                    let other = if e.src == pattern.nodes[i].id {
                        &e.dst
                    } else if e.dst == pattern.nodes[i].id {
                        &e.src
                    } else {
                        return false;
                    };
                    pattern
                        .nodes
                        .iter()
                        .position(|p| &p.id == other)
                        .is_some_and(|j| placed[j])
                })
        });
        let next = connected.unwrap_or_else(|| (0..n).find(|&i| !placed[i]).expect("unplaced"));
        placed[next] = true;
        order.push(next);
    }
    order
}

fn search(
    pattern: &Pattern,
    host: &ModelGraph,
    fixed: &BTreeMap<String, NodeId>,
    limit: Option<usize>,
) -> Vec<Vec<NodeId>> {
    let index = HostIndex::new(host);
    let pos: HashMap<&str, usize> = pattern
        .nodes
        .iter()
        .enumerate()
        .map(|(i, n)| (n.id.as_str(), i))
        .collect();
    // Edges naming nodes the pattern does not declare can never embed.
    if pattern
        .edges
        .iter()
        .any(|e| !pos.contains_key(e.src.as_str()) || !pos.contains_key(e.dst.as_str()))
    {
        return Vec::new();
    }
    let mut slots = vec![None; pattern.nodes.len()];
    let mut used = HashSet::new();
    for (i, n) in pattern.nodes.iter().enumerate() {
        if let Some(&h) = fixed.get(&n.id) {
            if host.node(h).is_none() || !used.insert(h) {
                return Vec::new();
            }
            slots[i] = Some(h);
        }
    }
    let is_fixed: Vec<bool> = slots.iter().map(Option::is_some).collect();
    let mut s = Search {
        pattern,
        index: &index,
        pos,
        order: search_order(pattern, &is_fixed),
        slots,
        used,
        limit,
        found: Vec::new(),
    };
    s.run(0);
    s.found
}

/// All matches of `pattern` in `host`, ordered lexicographically by the
/// host ids assigned to the pattern nodes in declaration order.
pub fn find_matches(pattern: &Pattern, host: &ModelGraph) -> Vec<Match> {
    let mut images = search(pattern, host, &BTreeMap::new(), None);
    images.sort();
    images
        .into_iter()
        .map(|image| Match {
            rule_id: String::new(),
            mapping: pattern
                .nodes
                .iter()
                .map(|n| n.id.clone())
                .zip(image)
                .collect(),
        })
        .collect()
}

/// True when `nac` cannot be embedded in `host` consistently with the
/// glue nodes it shares (by id) with `m`; that is, the forbidden structure
/// is absent and the rule may fire.
pub fn nac_holds(m: &Match, nac: &Pattern, host: &ModelGraph) -> bool {
    let glue: BTreeMap<String, NodeId> = nac
        .nodes
        .iter()
        .filter_map(|n| m.mapping.get(&n.id).map(|&h| (n.id.clone(), h)))
        .collect();
    search(nac, host, &glue, Some(1)).is_empty()
}

/// Whether `m` is still a valid occurrence of `pattern` in `host`.
pub fn embeds(m: &Match, pattern: &Pattern, host: &ModelGraph) -> bool {
    if pattern.nodes.len() != m.mapping.len()
        || pattern.nodes.iter().any(|n| !m.mapping.contains_key(&n.id))
    {
        return false;
    }
    !search(pattern, host, &m.mapping, Some(1)).is_empty()
}
