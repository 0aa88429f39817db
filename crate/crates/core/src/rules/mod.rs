//! Rule documents: the JSON rule file format, threshold substitution,
//! validation, and the built-in detection catalog.

pub mod codes;

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::engine::{
    AttrConstraint, Comparator, Operand, Pattern, PatternEdge, PatternNode, RhsAdditions, RhsNode,
    Rule,
};
use crate::graph::{drl_meta_model, AttrKind, AttrValue, TypeGraph};

pub use codes::{fault_codes, lookup, FaultCode};

/// Relative path of the built-in catalog inside this crate.
pub const BUILTIN_CATALOG_PATH: &str = "rules/catalog.json";

/// Text of the shipped catalog, embedded at build time.
pub const BUILTIN_CATALOG: &str = include_str!("../../rules/catalog.json");

#[derive(Debug, Error)]
pub enum RuleError {
    #[error("rule document is not valid JSON: {0}")]
    Parse(String),
    #[error("rule document schema error: {0}")]
    Schema(String),
    #[error("unknown threshold ${0}")]
    UnknownThreshold(String),
}

/// Serialized rule file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RuleDocument {
    pub format_version: String,
    #[serde(default)]
    pub thresholds: BTreeMap<String, f64>,
    pub rules: Vec<RuleSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct RuleSpec {
    pub id: String,
    #[serde(default)]
    pub priority: i64,
    pub fault_code: String,
    pub message: String,
    pub lhs: PatternSpec,
    #[serde(default)]
    pub nacs: Vec<PatternSpec>,
    pub rhs: PatternSpec,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternSpec {
    #[serde(default)]
    pub nodes: Vec<NodeSpec>,
    #[serde(default)]
    pub edges: Vec<EdgeSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: String,
    #[serde(rename = "type")]
    pub ty: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraints: Vec<ConstraintSpec>,
}

/// `value` is a literal, a `"$name"` threshold reference, or
/// `{"node": id, "attr": name}` naming another pattern node's attribute.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub attr: String,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeSpec {
    pub label: String,
    pub src: String,
    pub dst: String,
}

impl RuleDocument {
    pub fn from_bytes(document: &[u8]) -> Result<Self, RuleError> {
        let text = std::str::from_utf8(document)
            .map_err(|e| RuleError::Parse(format!("not UTF-8: {e}")))?;
        serde_json::from_str(text).map_err(|e| {
            if e.is_data() {
                RuleError::Schema(e.to_string())
            } else {
                RuleError::Parse(e.to_string())
            }
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("rule document serializes")
    }

    /// Substitutes thresholds and validates every rule against `tg`.
    pub fn compile(&self, tg: &TypeGraph) -> Result<Vec<Rule>, RuleError> {
        if self.format_version != "1" {
            return Err(RuleError::Schema(format!(
                "unsupported formatVersion {:?}",
                self.format_version
            )));
        }
        let mut ids = HashSet::new();
        let mut out = Vec::with_capacity(self.rules.len());
        for spec in &self.rules {
            if !ids.insert(spec.id.as_str()) {
                return Err(RuleError::Schema(format!("duplicate rule id {}", spec.id)));
            }
            let code = &spec.fault_code;
            let builtin = codes::detectable_codes().any(|c| c == code);
            if !builtin && !codes::is_user_code(code) {
                return Err(RuleError::Schema(format!(
                    "rule {}: fault code {code} is neither a detectable built-in code nor X-prefixed",
                    spec.id
                )));
            }
            let rule = Rule {
                id: spec.id.clone(),
                priority: spec.priority,
                fault_code: code.clone(),
                message: self.substitute_message(&spec.message)?,
                lhs: self.pattern(&spec.lhs, tg)?,
                nacs: spec
                    .nacs
                    .iter()
                    .map(|n| self.pattern(n, tg))
                    .collect::<Result<_, _>>()?,
                rhs: RhsAdditions {
                    nodes: spec
                        .rhs
                        .nodes
                        .iter()
                        .map(|n| {
                            if n.constraints.is_empty() {
                                Ok(RhsNode {
                                    id: n.id.clone(),
                                    ty: n.ty.clone(),
                                })
                            } else {
                                Err(RuleError::Schema(format!(
                                    "rule {}: rhs nodes take no constraints",
                                    spec.id
                                )))
                            }
                        })
                        .collect::<Result<_, _>>()?,
                    edges: spec.rhs.edges.iter().map(edge).collect(),
                },
            };
            rule.validate(tg)
                .map_err(|e| RuleError::Schema(format!("rule {}: {e}", spec.id)))?;
            out.push(rule);
        }
        Ok(out)
    }

    fn threshold(&self, name: &str) -> Result<f64, RuleError> {
        self.thresholds
            .get(name)
            .copied()
            .ok_or_else(|| RuleError::UnknownThreshold(name.to_string()))
    }

    fn substitute_message(&self, template: &str) -> Result<String, RuleError> {
        let mut out = String::new();
        let mut rest = template;
        while let Some(at) = rest.find("{$") {
            out.push_str(&rest[..at]);
            let after = &rest[at + 2..];
            let Some(close) = after.find('}') else {
                out.push_str(&rest[at..]);
                return Ok(out);
            };
            out.push_str(&format_number(self.threshold(&after[..close])?));
            rest = &after[close + 1..];
        }
        out.push_str(rest);
        Ok(out)
    }

    fn pattern(&self, spec: &PatternSpec, tg: &TypeGraph) -> Result<Pattern, RuleError> {
        let mut nodes = Vec::with_capacity(spec.nodes.len());
        for n in &spec.nodes {
            let mut constraints = Vec::with_capacity(n.constraints.len());
            for c in &n.constraints {
                let op = Comparator::parse(&c.op)
                    .ok_or_else(|| RuleError::Schema(format!("unknown comparator {:?}", c.op)))?;
                let kind = tg.attr_kind(&n.ty, &c.attr);
                let operand = match &c.value {
                    None | Some(Value::Null) => None,
                    Some(v) => Some(self.operand(v, kind)?),
                };
                constraints.push(AttrConstraint {
                    attr: c.attr.clone(),
                    op,
                    operand,
                });
            }
            nodes.push(PatternNode {
                id: n.id.clone(),
                ty: n.ty.clone(),
                constraints,
            });
        }
        Ok(Pattern {
            nodes,
            edges: spec.edges.iter().map(edge).collect(),
        })
    }

    fn operand(&self, v: &Value, kind: Option<AttrKind>) -> Result<Operand, RuleError> {
        let literal = match v {
            Value::String(s) => match s.strip_prefix('$') {
                Some(name) => number_for(self.threshold(name)?, kind),
                None => AttrValue::Str(s.clone()),
            },
            Value::Bool(b) => AttrValue::Bool(*b),
            Value::Number(n) => match n.as_i64() {
                Some(i) => AttrValue::Int(i),
                None => AttrValue::Real(n.as_f64().unwrap_or(f64::NAN)),
            },
            Value::Object(map) => {
                let field = |k: &str| {
                    map.get(k)
                        .and_then(Value::as_str)
                        .map(str::to_string)
                        .ok_or_else(|| {
                            RuleError::Schema(format!("attribute reference needs a string {k:?}"))
                        })
                };
                if map.len() != 2 {
                    return Err(RuleError::Schema(
                        "attribute reference takes exactly \"node\" and \"attr\"".into(),
                    ));
                }
                return Ok(Operand::Attr {
                    node: field("node")?,
                    attr: field("attr")?,
                });
            }
            Value::Array(_) | Value::Null => {
                return Err(RuleError::Schema(format!(
                    "unsupported constraint value {v}"
                )))
            }
        };
        Ok(Operand::Literal(literal))
    }
}

fn edge(e: &EdgeSpec) -> PatternEdge {
    PatternEdge {
        label: e.label.clone(),
        src: e.src.clone(),
        dst: e.dst.clone(),
    }
}

fn number_for(x: f64, kind: Option<AttrKind>) -> AttrValue {
    if kind == Some(AttrKind::Integer) && x.fract() == 0.0 && x.abs() < 9.0e15 {
        AttrValue::Int(x as i64)
    } else {
        AttrValue::Real(x)
    }
}

fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 9.0e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

/// Parses, substitutes and validates a rule document against the DRL
/// meta-model.
pub fn load_rules(document: &[u8]) -> Result<Vec<Rule>, RuleError> {
    load_rules_with(document, &BTreeMap::new())
}

/// As [`load_rules`], with threshold values overridden by name first.
pub fn load_rules_with(
    document: &[u8],
    overrides: &BTreeMap<String, f64>,
) -> Result<Vec<Rule>, RuleError> {
    let mut doc = RuleDocument::from_bytes(document)?;
    doc.thresholds
        .extend(overrides.iter().map(|(k, v)| (k.clone(), *v)));
    doc.compile(drl_meta_model())
}

/// The shipped detection catalog.
pub fn builtin_catalog() -> RuleDocument {
    RuleDocument::from_bytes(BUILTIN_CATALOG.as_bytes()).expect("embedded catalog parses")
}

pub fn builtin_rules() -> Vec<Rule> {
    builtin_catalog()
        .compile(drl_meta_model())
        .expect("embedded catalog validates")
}

/// The rule family a rule id belongs to: variants such as `R05a` and
/// `R05b` share the family `R05`.
pub fn rule_family(id: &str) -> &str {
    id.trim_end_matches(|c: char| c.is_ascii_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_catalog_has_ten_families() {
        let rules = builtin_rules();
        let families: std::collections::BTreeSet<&str> =
            rules.iter().map(|r| rule_family(&r.id)).collect();
        assert_eq!(families.len(), 10);
        let codes: std::collections::BTreeSet<&str> =
            rules.iter().map(|r| r.fault_code.as_str()).collect();
        let expected: std::collections::BTreeSet<&str> = codes::detectable_codes().collect();
        assert_eq!(codes, expected);
        assert!(rules.iter().all(|r| r.priority == 0));
    }

    #[test]
    fn shipped_file_matches_embedded_copy() {
        let on_disk = std::fs::read_to_string(
            std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join(BUILTIN_CATALOG_PATH),
        )
        .unwrap();
        assert_eq!(on_disk, BUILTIN_CATALOG);
    }

    #[test]
    fn serialization_round_trip_reloads() {
        let doc = builtin_catalog();
        let again = load_rules(doc.to_json().as_bytes()).unwrap();
        assert_eq!(again, builtin_rules());
    }

    #[test]
    fn thresholds_substituted_with_attribute_kind() {
        let rules = builtin_rules();
        let r07b = rules.iter().find(|r| r.id == "R07b").unwrap();
        assert_eq!(
            r07b.lhs.nodes[0].constraints[0].operand,
            Some(Operand::Literal(AttrValue::Int(10000)))
        );
        let r05a = rules.iter().find(|r| r.id == "R05a").unwrap();
        assert_eq!(
            r05a.lhs.nodes[0].constraints[0].operand,
            Some(Operand::Literal(AttrValue::Real(0.2)))
        );
        assert!(r05a.message.ends_with("(limit 0.2)"));
    }

    #[test]
    fn overrides_replace_thresholds() {
        let overrides = [("syncMax".to_string(), 500.0)].into_iter().collect();
        let rules = load_rules_with(BUILTIN_CATALOG.as_bytes(), &overrides).unwrap();
        let r07b = rules.iter().find(|r| r.id == "R07b").unwrap();
        assert_eq!(
            r07b.lhs.nodes[0].constraints[0].operand,
            Some(Operand::Literal(AttrValue::Int(500)))
        );
    }

    const MINIMAL: &str = r#"{
      "formatVersion": "1",
      "thresholds": {},
      "rules": [{
        "id": "X1", "faultCode": "X1", "message": "m",
        "lhs": {"nodes": [{"id": "x", "type": "Exploration",
                           "constraints": [{"attr": "epsilon", "op": ">", "value": "$epsMax"}]}]},
        "nacs": [{"nodes": [{"id": "x", "type": "Exploration"},
                            {"id": "f", "type": "Fault",
                             "constraints": [{"attr": "code", "op": "=", "value": "X1"}]}],
                  "edges": [{"label": "marks", "src": "f", "dst": "x"}]}],
        "rhs": {"nodes": [{"id": "f", "type": "Fault"}],
                "edges": [{"label": "marks", "src": "f", "dst": "x"}]}
      }]
    }"#;

    #[test]
    fn unknown_threshold() {
        let err = load_rules(MINIMAL.as_bytes()).unwrap_err();
        assert!(matches!(err, RuleError::UnknownThreshold(ref n) if n == "epsMax"));
        let ok = MINIMAL.replace("\"thresholds\": {}", "\"thresholds\": {\"epsMax\": 0.9}");
        assert_eq!(load_rules(ok.as_bytes()).unwrap().len(), 1);
    }

    #[test]
    fn missing_self_nac_is_schema_error() {
        let doc = MINIMAL
            .replace("\"thresholds\": {}", "\"thresholds\": {\"epsMax\": 0.9}")
            .replace("\"value\": \"X1\"", "\"value\": \"X2\"");
        let err = load_rules(doc.as_bytes()).unwrap_err();
        assert!(
            matches!(err, RuleError::Schema(ref m) if m.contains("self-NAC")),
            "{err}"
        );
    }

    #[test]
    fn malformed_and_incomplete_documents() {
        assert!(matches!(
            load_rules(b"{\"formatVersion\": "),
            Err(RuleError::Parse(_))
        ));
        assert!(matches!(
            load_rules(br#"{"formatVersion": "1"}"#),
            Err(RuleError::Schema(_))
        ));
        assert!(matches!(
            load_rules(br#"{"formatVersion": "2", "rules": []}"#),
            Err(RuleError::Schema(_))
        ));
        let unknown_type = MINIMAL
            .replace("\"thresholds\": {}", "\"thresholds\": {\"epsMax\": 0.9}")
            .replacen("\"Exploration\"", "\"Explorer\"", 1);
        assert!(matches!(
            load_rules(unknown_type.as_bytes()),
            Err(RuleError::Schema(ref m)) if m.contains("unknown node type")
        ));
    }

    #[test]
    fn f09_and_unprefixed_codes_rejected() {
        for code in ["F09", "G1"] {
            let doc = MINIMAL
                .replace("\"thresholds\": {}", "\"thresholds\": {\"epsMax\": 0.9}")
                .replace("X1", code);
            assert!(
                matches!(load_rules(doc.as_bytes()), Err(RuleError::Schema(_))),
                "{code}"
            );
        }
    }

    #[test]
    fn family_names() {
        assert_eq!(rule_family("R03a"), "R03");
        assert_eq!(rule_family("R10"), "R10");
    }
}
