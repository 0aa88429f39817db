use crate::graph::{GraphError, ModelGraph, NodeId};

use super::matcher::{embeds, nac_holds, Match};
use super::rule::Rule;
use super::EngineError;

/// One rule application.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Firing {
    pub rule_id: String,
    pub fault_code: String,
    /// Host ids assigned to the lhs nodes, in lhs declaration order.
    pub mapped: Vec<(String, NodeId)>,
    pub fault: NodeId,
}

#[derive(Debug, Clone)]
pub struct FixpointOutcome {
    pub graph: ModelGraph,
    pub firings: Vec<Firing>,
}

/// Applies `rule` at `m`, returning the extended graph.
pub fn apply_rule(rule: &Rule, m: &Match, host: &ModelGraph) -> Result<ModelGraph, EngineError> {
    let mut g = host.clone();
    apply_in_place(rule, m, &mut g)?;
    Ok(g)
}

fn apply_in_place(rule: &Rule, m: &Match, g: &mut ModelGraph) -> Result<NodeId, EngineError> {
    if !embeds(m, &rule.lhs, g) {
        return Err(EngineError::InvalidMatch {
            rule: rule.id.clone(),
        });
    }
    if let Some(index) = rule.nacs.iter().position(|nac| !nac_holds(m, nac, g)) {
        return Err(EngineError::NacViolated {
            rule: rule.id.clone(),
            nac: index,
        });
    }
    let fault_id = rule
        .fault_node()
        .map(|n| n.id.as_str())
        .ok_or_else(|| EngineError::InvalidRule(rule.id.clone()))?;
    let anchor = rule
        .rhs
        .edges
        .iter()
        .filter(|e| e.src == fault_id)
        .find_map(|e| m.get(&e.dst))
        .and_then(|id| g.node(id))
        .and_then(|n| n.line);
    let message = rule.render_message(m, g);
    let fault = g
        .push_fault(&rule.fault_code, &message, anchor)
        .map_err(EngineError::Graph)?;
    for e in &rule.rhs.edges {
        let dst = m.get(&e.dst).ok_or(EngineError::InvalidMatch {
            rule: rule.id.clone(),
        })?;
        g.add_edge(&e.label, fault, dst);
    }
    Ok(fault)
}

/// Rules in application order: descending priority, then ascending id.
pub fn schedule(rules: &[Rule]) -> Vec<&Rule> {
    let mut ordered: Vec<&Rule> = rules.iter().collect();
    ordered.sort_by(|a, b| b.priority.cmp(&a.priority).then_with(|| a.id.cmp(&b.id)));
    ordered
}

/// Applies rules until none is applicable. After every firing the search
/// restarts from the highest-priority rule, so a lower-priority rule only
/// fires when no higher-priority one can.
pub fn run_to_fixpoint(rules: &[Rule], host: &ModelGraph) -> Result<FixpointOutcome, EngineError> {
    run_scheduled(&schedule(rules), host)
}

/// Like [`run_to_fixpoint`] but takes the application order as given.
pub fn run_scheduled(ordered: &[&Rule], host: &ModelGraph) -> Result<FixpointOutcome, EngineError> {
    let n = host.node_count().max(1);
    let budget = ordered.len() * n * n;
    let mut graph = host.clone();
    let mut firings = Vec::new();

    'search: loop {
        for rule in ordered {
            for m in rule.find_matches(&graph) {
                if !rule.nacs.iter().all(|nac| nac_holds(&m, nac, &graph)) {
                    continue;
                }
                if firings.len() >= budget {
                    return Err(EngineError::IterationBudgetExceeded { budget });
                }
                let fault = apply_in_place(rule, &m, &mut graph)?;
                firings.push(Firing {
                    rule_id: rule.id.clone(),
                    fault_code: rule.fault_code.clone(),
                    mapped: rule
                        .lhs
                        .nodes
                        .iter()
                        .filter_map(|p| m.get(&p.id).map(|h| (p.id.clone(), h)))
                        .collect(),
                    fault,
                });
                continue 'search;
            }
        }
        break;
    }
    Ok(FixpointOutcome { graph, firings })
}

impl From<GraphError> for EngineError {
    fn from(e: GraphError) -> Self {
        EngineError::Graph(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::pattern::{AttrConstraint, Comparator, Pattern, PatternEdge};
    use crate::engine::rule::{RhsAdditions, RhsNode};

    fn missing_step_rule() -> Rule {
        Rule {
            id: "R01".into(),
            priority: 0,
            fault_code: "F01".into(),
            message: "environment is never stepped".into(),
            lhs: Pattern::new()
                .node("p", "DRLProgram")
                .node("e", "Environment")
                .node("i", "Initialize")
                .edge("hasEnv", "p", "e")
                .edge("initializedBy", "e", "i"),
            nacs: vec![
                Pattern::new()
                    .node("i", "Initialize")
                    .node("s", "Step")
                    .edge("followedBy", "i", "s"),
                Pattern::new()
                    .node("i", "Initialize")
                    .node_with(
                        "f",
                        "Fault",
                        vec![AttrConstraint::new("code", Comparator::Eq, "F01")],
                    )
                    .edge("marks", "f", "i"),
            ],
            rhs: RhsAdditions {
                nodes: vec![RhsNode {
                    id: "f".into(),
                    ty: "Fault".into(),
                }],
                edges: vec![PatternEdge {
                    label: "marks".into(),
                    src: "f".into(),
                    dst: "i".into(),
                }],
            },
        }
    }

    fn unstepped() -> ModelGraph {
        let mut g = ModelGraph::new();
        let p = g.add_node("DRLProgram", [], Some(1));
        let e = g.add_node("Environment", [], Some(4));
        let i = g.add_node("Initialize", [], Some(4));
        g.add_edge("hasEnv", p, e);
        g.add_edge("initializedBy", e, i);
        g
    }

    #[test]
    fn fires_once_and_self_nac_blocks_second_application() {
        let rule = missing_step_rule();
        let g = unstepped();
        let m = rule.find_matches(&g).remove(0);
        let once = apply_rule(&rule, &m, &g).unwrap();
        let fault = once.nodes_of_type("Fault").next().unwrap();
        assert_eq!(fault.attr("code").unwrap().to_string(), "F01");
        assert_eq!(fault.line, Some(4));
        assert!(matches!(
            apply_rule(&rule, &m, &once),
            Err(EngineError::NacViolated { nac: 1, .. })
        ));
    }

    #[test]
    fn stale_match_rejected() {
        let rule = missing_step_rule();
        let mut m = rule.find_matches(&unstepped()).remove(0);
        m.mapping.insert("e".into(), NodeId(7));
        assert!(matches!(
            apply_rule(&rule, &m, &unstepped()),
            Err(EngineError::InvalidMatch { .. })
        ));
    }

    #[test]
    fn no_rules_leaves_host_unchanged() {
        let g = unstepped();
        let out = run_to_fixpoint(&[], &g).unwrap();
        assert_eq!(out.graph, g);
        assert!(out.firings.is_empty());
    }

    #[test]
    fn fixpoint_is_idempotent() {
        let rules = [missing_step_rule()];
        let first = run_to_fixpoint(&rules, &unstepped()).unwrap();
        assert_eq!(first.firings.len(), 1);
        let second = run_to_fixpoint(&rules, &first.graph).unwrap();
        assert!(second.firings.is_empty());
        assert_eq!(second.graph, first.graph);
    }

    #[test]
    fn budget_guards_runaway_rules() {
        // Without its self-NAC the rule would fire forever.
        let mut rule = missing_step_rule();
        rule.nacs.pop();
        let err = run_to_fixpoint(&[rule], &unstepped()).unwrap_err();
        assert!(matches!(
            err,
            EngineError::IterationBudgetExceeded { budget: 9 }
        ));
    }

    #[test]
    fn schedule_orders_by_priority_then_id() {
        let mk = |id: &str, priority| Rule {
            id: id.into(),
            priority,
            ..missing_step_rule()
        };
        let rules = [mk("b", 0), mk("a", 0), mk("z", 5)];
        let ids: Vec<&str> = schedule(&rules).iter().map(|r| r.id.as_str()).collect();
        assert_eq!(ids, ["z", "a", "b"]);
    }
}
