use std::collections::{BTreeMap, HashSet};

use crate::graph::{edge_label, node_type, AttrKind, AttrValue, ModelGraph, TypeGraph};

use super::matcher::{find_matches, Match};
use super::pattern::{Comparator, Operand, Pattern, PatternEdge};

/// A node created by a rule's right-hand side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhsNode {
    pub id: String,
    pub ty: String,
}

/// What a rule adds on firing. Edges may connect the new node to nodes of
/// the left-hand side, referenced by pattern id.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RhsAdditions {
    pub nodes: Vec<RhsNode>,
    pub edges: Vec<PatternEdge>,
}

/// A detection rule: fires on every occurrence of `lhs` where no NAC can be
/// embedded, adding a Fault node.
#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub id: String,
    /// Larger values are tried first.
    pub priority: i64,
    pub fault_code: String,
    /// `{node.attr}` placeholders are filled from the matched host nodes.
    pub message: String,
    pub lhs: Pattern,
    pub nacs: Vec<Pattern>,
    pub rhs: RhsAdditions,
}

impl Rule {
    /// The fault node template. Present on every validated rule.
    pub fn fault_node(&self) -> Option<&RhsNode> {
        self.rhs.nodes.iter().find(|n| n.ty == node_type::FAULT)
    }

    pub fn find_matches(&self, host: &ModelGraph) -> Vec<Match> {
        let mut ms = find_matches(&self.lhs, host);
        for m in &mut ms {
            m.rule_id = self.id.clone();
        }
        ms
    }

    /// Renders the message template for a match.
    pub fn render_message(&self, m: &Match, host: &ModelGraph) -> String {
        let mut out = String::with_capacity(self.message.len());
        let mut rest = self.message.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let Some(close) = after.find('}') else {
                out.push_str(&rest[open..]);
                return out;
            };
            let key = &after[..close];
            let value = key.split_once('.').and_then(|(pn, attr)| {
                let id = m.get(pn)?;
                host.node(id)?.attr(attr).map(AttrValue::to_string)
            });
            match value {
                Some(v) => out.push_str(&v),
                None if key.contains('.') => out.push('?'),
                None => {
                    out.push('{');
                    out.push_str(key);
                    out.push('}');
                }
            }
            rest = &after[close + 1..];
        }
        out.push_str(rest);
        out
    }

    /// Checks the rule against `tg`: well-typed patterns, purely additive
    /// right-hand side holding exactly one Fault node, and a self-NAC that
    /// forbids re-adding the same fault configuration.
    pub fn validate(&self, tg: &TypeGraph) -> Result<(), String> {
        check_pattern(&self.lhs, tg, None).map_err(|e| format!("lhs: {e}"))?;
        for (i, nac) in self.nacs.iter().enumerate() {
            check_pattern(nac, tg, Some(&self.lhs)).map_err(|e| format!("nac {i}: {e}"))?;
        }

        if self.rhs.nodes.is_empty() {
            return Err("rhs adds nothing".into());
        }
        let faults: Vec<&RhsNode> = self
            .rhs
            .nodes
            .iter()
            .filter(|n| n.ty == node_type::FAULT)
            .collect();
        if faults.len() != 1 || self.rhs.nodes.len() != 1 {
            return Err("rhs must add exactly one Fault node".into());
        }
        let fault = faults[0];
        if self.lhs.find_node(&fault.id).is_some() {
            return Err(format!("rhs node {} collides with an lhs node", fault.id));
        }
        for e in &self.rhs.edges {
            if e.src != fault.id {
                return Err(format!("rhs edge {} must start at the Fault node", e.label));
            }
            if e.label == edge_label::FLAGGED {
                return Err("the flagged edge is added implicitly".into());
            }
            let target = self
                .lhs
                .find_node(&e.dst)
                .ok_or_else(|| format!("rhs edge target {} is not an lhs node", e.dst))?;
            if !tg.has_edge_type(&e.label, node_type::FAULT, &target.ty) {
                return Err(format!(
                    "rhs edge {} from Fault to {} is not in the type graph",
                    e.label, target.ty
                ));
            }
        }

        if !self.nacs.iter().any(|nac| self.is_self_nac(nac)) {
            return Err(format!(
                "rule {} has no self-NAC for {}",
                self.id, self.fault_code
            ));
        }
        Ok(())
    }

    /// A NAC that contains a Fault node constrained to this rule's code,
    /// connected to the same glue nodes the right-hand side connects to.
    fn is_self_nac(&self, nac: &Pattern) -> bool {
        let code = AttrValue::Str(self.fault_code.clone());
        nac.nodes.iter().any(|f| {
            f.ty == node_type::FAULT
                && self.lhs.find_node(&f.id).is_none()
                && f.constraints.iter().any(|c| {
                    c.attr == "code"
                        && c.op == Comparator::Eq
                        && c.operand == Some(Operand::Literal(code.clone()))
                })
                && self.rhs.edges.iter().all(|re| {
                    self.lhs.find_node(&re.dst).is_some()
                        && nac.find_node(&re.dst).is_some()
                        && nac
                            .edges
                            .iter()
                            .any(|ne| ne.label == re.label && ne.src == f.id && ne.dst == re.dst)
                })
        })
    }
}

fn check_pattern(p: &Pattern, tg: &TypeGraph, glue_from: Option<&Pattern>) -> Result<(), String> {
    let mut types: BTreeMap<&str, &str> = BTreeMap::new();
    for n in &p.nodes {
        if !tg.has_node_type(&n.ty) {
            return Err(format!("unknown node type {}", n.ty));
        }
        if types.insert(&n.id, &n.ty).is_some() {
            return Err(format!("duplicate pattern node id {}", n.id));
        }
        if let Some(lhs) = glue_from {
            if let Some(g) = lhs.find_node(&n.id) {
                if g.ty != n.ty {
                    return Err(format!(
                        "glue node {} is {} in the lhs but {} here",
                        n.id, g.ty, n.ty
                    ));
                }
            }
        }
    }
    for n in &p.nodes {
        for c in &n.constraints {
            let kind = tg
                .attr_kind(&n.ty, &c.attr)
                .ok_or_else(|| format!("{} has no attribute {}", n.ty, c.attr))?;
            match (&c.operand, c.op.is_binary()) {
                (Some(_), false) => {
                    return Err(format!("{} on {} takes no value", c.op, c.attr));
                }
                (None, true) => return Err(format!("{} on {} needs a value", c.op, c.attr)),
                (Some(Operand::Literal(v)), true) => {
                    check_operand_kind(kind, v.kind(), c.op, &c.attr)?;
                }
                (Some(Operand::Attr { node, attr }), true) => {
                    let other_ty = types
                        .get(node.as_str())
                        .ok_or_else(|| format!("constraint reads unknown pattern node {node}"))?;
                    let other_kind = tg
                        .attr_kind(other_ty, attr)
                        .ok_or_else(|| format!("{other_ty} has no attribute {attr}"))?;
                    check_operand_kind(kind, other_kind, c.op, &c.attr)?;
                }
                (None, false) => {}
            }
        }
    }
    let mut seen = HashSet::new();
    for e in &p.edges {
        let (Some(s), Some(d)) = (types.get(e.src.as_str()), types.get(e.dst.as_str())) else {
            return Err(format!("edge {} names an undeclared pattern node", e.label));
        };
        if !tg.has_edge_type(&e.label, s, d) {
            return Err(format!(
                "edge type {} {s}->{d} is not in the type graph",
                e.label
            ));
        }
        if !seen.insert((&e.label, &e.src, &e.dst)) {
            return Err(format!(
                "duplicate pattern edge {} {}->{}",
                e.label, e.src, e.dst
            ));
        }
    }
    Ok(())
}

fn check_operand_kind(
    attr: AttrKind,
    operand: AttrKind,
    op: Comparator,
    name: &str,
) -> Result<(), String> {
    let numeric = |k| matches!(k, AttrKind::Integer | AttrKind::Real);
    let ordered = matches!(
        op,
        Comparator::Lt | Comparator::Le | Comparator::Gt | Comparator::Ge
    );
    let ok = if numeric(attr) {
        numeric(operand)
    } else {
        attr == operand && !(ordered && attr == AttrKind::Boolean)
    };
    if ok {
        Ok(())
    } else {
        Err(format!(
            "cannot compare {attr} attribute {name} with {operand} using {op}"
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pattern::AttrConstraint;
    use crate::graph::drl_meta_model;

    fn missing_terminal() -> Rule {
        Rule {
            id: "R02".into(),
            priority: 0,
            fault_code: "F02".into(),
            message: "step without terminal check".into(),
            lhs: Pattern::new().node("s", "Step"),
            nacs: vec![
                Pattern::new()
                    .node("s", "Step")
                    .node("t", "TerminalCheck")
                    .edge("checkedBy", "s", "t"),
                Pattern::new()
                    .node("s", "Step")
                    .node_with(
                        "f",
                        "Fault",
                        vec![AttrConstraint::new("code", Comparator::Eq, "F02")],
                    )
                    .edge("marks", "f", "s"),
            ],
            rhs: RhsAdditions {
                nodes: vec![RhsNode {
                    id: "f".into(),
                    ty: "Fault".into(),
                }],
                edges: vec![PatternEdge {
                    label: "marks".into(),
                    src: "f".into(),
                    dst: "s".into(),
                }],
            },
        }
    }

    #[test]
    fn well_formed_rule_validates() {
        missing_terminal().validate(drl_meta_model()).unwrap();
    }

    #[test]
    fn missing_self_nac_rejected() {
        let mut r = missing_terminal();
        r.nacs.pop();
        let err = r.validate(drl_meta_model()).unwrap_err();
        assert!(err.contains("self-NAC"), "{err}");
    }

    #[test]
    fn self_nac_for_other_code_rejected() {
        let mut r = missing_terminal();
        r.fault_code = "F03".into();
        assert!(r.validate(drl_meta_model()).is_err());
    }

    #[test]
    fn empty_rhs_rejected() {
        let mut r = missing_terminal();
        r.rhs = RhsAdditions::default();
        assert_eq!(
            r.validate(drl_meta_model()).unwrap_err(),
            "rhs adds nothing"
        );
    }

    #[test]
    fn ill_typed_patterns_rejected() {
        let mut r = missing_terminal();
        r.lhs = Pattern::new().node("s", "Stepp");
        assert!(r
            .validate(drl_meta_model())
            .unwrap_err()
            .contains("unknown node type"));

        let mut r = missing_terminal();
        r.lhs = Pattern::new().node_with(
            "s",
            "Step",
            vec![AttrConstraint::new("gamma", Comparator::Gt, 0.5)],
        );
        assert!(r
            .validate(drl_meta_model())
            .unwrap_err()
            .contains("no attribute gamma"));

        let mut r = missing_terminal();
        r.nacs[0] = Pattern::new()
            .node("s", "Step")
            .node("t", "TerminalCheck")
            .edge("checkedBy", "t", "s");
        assert!(r
            .validate(drl_meta_model())
            .unwrap_err()
            .contains("not in the type graph"));
    }

    #[test]
    fn message_placeholders() {
        let mut g = ModelGraph::new();
        let x = g.add_node(
            "Exploration",
            [("epsilonFinal".to_string(), AttrValue::Real(0.5))],
            None,
        );
        let r = Rule {
            message: "final epsilon {x.epsilonFinal}, decay {x.decay}, {literal}".into(),
            ..missing_terminal()
        };
        let m = Match {
            rule_id: "R".into(),
            mapping: [("x".to_string(), x)].into_iter().collect(),
        };
        assert_eq!(
            r.render_message(&m, &g),
            "final epsilon 0.5, decay ?, {literal}"
        );
    }
}
