use std::cmp::Ordering;
use std::fmt;

use crate::graph::{AttrValue, Node};

/// Attribute comparison operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    Absent,
    Present,
}

impl Comparator {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "=" | "==" => Comparator::Eq,
            "!=" | "≠" => Comparator::Ne,
            "<" => Comparator::Lt,
            "<=" | "≤" => Comparator::Le,
            ">" => Comparator::Gt,
            ">=" | "≥" => Comparator::Ge,
            "absent" => Comparator::Absent,
            "present" => Comparator::Present,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Eq => "=",
            Comparator::Ne => "!=",
            Comparator::Lt => "<",
            Comparator::Le => "<=",
            Comparator::Gt => ">",
            Comparator::Ge => ">=",
            Comparator::Absent => "absent",
            Comparator::Present => "present",
        }
    }

    /// Whether the operator takes a right-hand operand.
    pub fn is_binary(self) -> bool {
        !matches!(self, Comparator::Absent | Comparator::Present)
    }

    /// Evaluates `lhs op rhs`. Comparisons involving a missing value or
    /// values of incomparable kinds are false.
    pub fn holds(self, lhs: Option<&AttrValue>, rhs: Option<&AttrValue>) -> bool {
        match self {
            Comparator::Absent => lhs.is_none(),
            Comparator::Present => lhs.is_some(),
            _ => {
                let (Some(a), Some(b)) = (lhs, rhs) else {
                    return false;
                };
                let Some(ord) = compare(a, b) else {
                    return false;
                };
                match self {
                    Comparator::Eq => ord == Ordering::Equal,
                    Comparator::Ne => ord != Ordering::Equal,
                    Comparator::Lt => ord == Ordering::Less,
                    Comparator::Le => ord != Ordering::Greater,
                    Comparator::Gt => ord == Ordering::Greater,
                    Comparator::Ge => ord != Ordering::Less,
                    Comparator::Absent | Comparator::Present => unreachable!(),
                }
            }
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

fn compare(a: &AttrValue, b: &AttrValue) -> Option<Ordering> {
    match (a, b) {
        (AttrValue::Str(x), AttrValue::Str(y)) => Some(x.cmp(y)),
        (AttrValue::Bool(x), AttrValue::Bool(y)) => Some(x.cmp(y)),
        _ => a.as_f64()?.partial_cmp(&b.as_f64()?),
    }
}

/// Right-hand side of a binary constraint.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Literal(AttrValue),
    /// Attribute of another node of the same pattern.
    Attr {
        node: String,
        attr: String,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttrConstraint {
    pub attr: String,
    pub op: Comparator,
    pub operand: Option<Operand>,
}

impl AttrConstraint {
    pub fn new(attr: &str, op: Comparator, literal: impl Into<AttrValue>) -> Self {
        Self {
            attr: attr.to_string(),
            op,
            operand: Some(Operand::Literal(literal.into())),
        }
    }

    pub fn absent(attr: &str) -> Self {
        Self {
            attr: attr.to_string(),
            op: Comparator::Absent,
            operand: None,
        }
    }

    pub fn present(attr: &str) -> Self {
        Self {
            attr: attr.to_string(),
            op: Comparator::Present,
            operand: None,
        }
    }

    pub fn cross(attr: &str, op: Comparator, node: &str, other_attr: &str) -> Self {
        Self {
            attr: attr.to_string(),
            op,
            operand: Some(Operand::Attr {
                node: node.to_string(),
                attr: other_attr.to_string(),
            }),
        }
    }

    /// The other pattern node this constraint reads, if any.
    pub fn referenced_node(&self) -> Option<&str> {
        match &self.operand {
            Some(Operand::Attr { node, .. }) => Some(node),
            _ => None,
        }
    }

    /// Evaluates against `node`; `lookup` resolves cross-node operands.
    pub fn holds<'a>(&self, node: &'a Node, lookup: impl Fn(&str) -> Option<&'a Node>) -> bool {
        let lhs = node.attr(&self.attr);
        let rhs = match &self.operand {
            None => None,
            Some(Operand::Literal(v)) => Some(v),
            Some(Operand::Attr { node, attr }) => match lookup(node) {
                Some(other) => other.attr(attr),
                None => return false,
            },
        };
        self.op.holds(lhs, rhs)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternNode {
    pub id: String,
    pub ty: String,
    pub constraints: Vec<AttrConstraint>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternEdge {
    pub label: String,
    pub src: String,
    pub dst: String,
}

/// A typed graph fragment with attribute constraints.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Pattern {
    pub nodes: Vec<PatternNode>,
    pub edges: Vec<PatternEdge>,
}

impl Pattern {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node(mut self, id: &str, ty: &str) -> Self {
        self.nodes.push(PatternNode {
            id: id.to_string(),
            ty: ty.to_string(),
            constraints: Vec::new(),
        });
        self
    }

    pub fn node_with(mut self, id: &str, ty: &str, constraints: Vec<AttrConstraint>) -> Self {
        self.nodes.push(PatternNode {
            id: id.to_string(),
            ty: ty.to_string(),
            constraints,
        });
        self
    }

    pub fn edge(mut self, label: &str, src: &str, dst: &str) -> Self {
        self.edges.push(PatternEdge {
            label: label.to_string(),
            src: src.to_string(),
            dst: dst.to_string(),
        });
        self
    }

    pub fn find_node(&self, id: &str) -> Option<&PatternNode> {
        self.nodes.iter().find(|n| n.id == id)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn comparisons_need_both_sides() {
        let half = AttrValue::Real(0.5);
        assert!(Comparator::Gt.holds(Some(&half), Some(&AttrValue::Real(0.2))));
        assert!(!Comparator::Gt.holds(None, Some(&AttrValue::Real(0.2))));
        assert!(!Comparator::Ne.holds(None, Some(&AttrValue::Real(0.2))));
        assert!(Comparator::Absent.holds(None, None));
        assert!(!Comparator::Present.holds(None, None));
    }

    #[test]
    fn integers_and_reals_compare_numerically() {
        assert!(Comparator::Eq.holds(Some(&AttrValue::Int(2)), Some(&AttrValue::Real(2.0))));
        assert!(Comparator::Lt.holds(Some(&AttrValue::Int(0)), Some(&AttrValue::Int(1))));
        assert!(!Comparator::Eq.holds(Some(&AttrValue::Int(1)), Some(&AttrValue::from("1"))));
        assert!(!Comparator::Ne.holds(Some(&AttrValue::Int(1)), Some(&AttrValue::from("1"))));
    }

    #[test]
    fn parse_round_trips_symbols() {
        use Comparator::*;
        for op in [Eq, Ne, Lt, Le, Gt, Ge, Absent, Present] {
            assert_eq!(Comparator::parse(op.symbol()), Some(op));
        }
        assert_eq!(Comparator::parse("~"), None);
    }
}
