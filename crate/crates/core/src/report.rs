//! The lint pipeline (extract, run rules to fixpoint, read back faults) and
//! the report formats.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{run_scheduled, schedule, EngineError, Firing, Rule};
use crate::extract::{extract_model, SourceUnit, SyntaxError};
use crate::graph::{edge_label, node_type, ModelGraph};
use crate::rules::codes::{fault_codes, title_for};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaultFinding {
    pub code: String,
    pub title: String,
    pub message: String,
    pub line: Option<u32>,
    /// Host nodes the fault was detected at.
    pub nodes: Vec<u32>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EngineStats {
    pub firings: usize,
    pub millis: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FaultReport {
    pub source: String,
    pub findings: Vec<FaultFinding>,
    pub summary: BTreeMap<String, usize>,
    pub stats: EngineStats,
}

#[derive(Debug, Error)]
pub enum LintError {
    #[error("{path}: {source}")]
    Syntax {
        path: String,
        #[source]
        source: SyntaxError,
    },
    #[error("{path}: {source}")]
    Engine {
        path: String,
        #[source]
        source: EngineError,
    },
}

/// Everything a lint run produced, for callers that need more than the
/// report.
#[derive(Debug, Clone)]
pub struct LintOutcome {
    pub model: ModelGraph,
    pub graph: ModelGraph,
    pub firings: Vec<Firing>,
    pub report: FaultReport,
}

pub fn lint(source: &SourceUnit, rules: &[Rule]) -> Result<FaultReport, LintError> {
    lint_detailed(source, rules).map(|o| o.report)
}

pub fn lint_detailed(source: &SourceUnit, rules: &[Rule]) -> Result<LintOutcome, LintError> {
    lint_ordered(source, &schedule(rules))
}

/// Like [`lint_detailed`] but with the rule order given by the caller.
pub fn lint_ordered(source: &SourceUnit, ordered: &[&Rule]) -> Result<LintOutcome, LintError> {
    let started = Instant::now();
    let model = extract_model(source).map_err(|e| LintError::Syntax {
        path: source.path.clone(),
        source: e,
    })?;
    let outcome = run_scheduled(ordered, &model).map_err(|e| LintError::Engine {
        path: source.path.clone(),
        source: e,
    })?;
    let mut report = extract_report(&outcome.graph);
    report.source = source.path.clone();
    report.stats = EngineStats {
        firings: outcome.firings.len(),
        millis: started.elapsed().as_secs_f64() * 1000.0,
    };
    Ok(LintOutcome {
        model,
        graph: outcome.graph,
        firings: outcome.firings,
        report,
    })
}

/// One finding per Fault node of `graph`, sorted by line then code.
pub fn extract_report(graph: &ModelGraph) -> FaultReport {
    let mut findings: Vec<FaultFinding> = graph
        .nodes_of_type(node_type::FAULT)
        .map(|f| {
            let code = f.attr("code").and_then(|v| v.as_str()).unwrap_or_default();
            let mut nodes: Vec<u32> = graph
                .out_edges(f.id)
                .filter(|e| e.label == edge_label::MARKS)
                .map(|e| e.dst.0)
                .collect();
            nodes.sort_unstable();
            FaultFinding {
                code: code.to_string(),
                title: title_for(code).to_string(),
                message: f
                    .attr("message")
                    .and_then(|v| v.as_str())
                    .unwrap_or_default()
                    .to_string(),
                line: f.line,
                nodes,
            }
        })
        .collect();
    findings.sort_by(|a, b| {
        (a.line, &a.code, &a.nodes, &a.message).cmp(&(b.line, &b.code, &b.nodes, &b.message))
    });
    let mut summary: BTreeMap<String, usize> = fault_codes()
        .iter()
        .map(|c| (c.code.to_string(), 0))
        .collect();
    for f in &findings {
        *summary.entry(f.code.clone()).or_default() += 1;
    }
    FaultReport {
        source: String::new(),
        findings,
        summary,
        stats: EngineStats::default(),
    }
}

impl FaultReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report without wall time, as compared against golden files.
    pub fn comparison_form(&self) -> String {
        let mut v = serde_json::to_value(self).expect("report serializes");
        if let Some(stats) = v.get_mut("stats").and_then(|s| s.as_object_mut()) {
            stats.remove("millis");
        }
        let mut s = serde_json::to_string_pretty(&v).expect("value serializes");
        s.push('\n');
        s
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for f in &self.findings {
            let line = f.line.map_or_else(|| "-".to_string(), |l| l.to_string());
            let _ = writeln!(out, "{line}: {} {} — {}", f.code, f.title, f.message);
        }
        let counts: Vec<String> = self
            .summary
            .iter()
            .filter(|(_, n)| **n > 0)
            .map(|(c, n)| format!("{c}: {n}"))
            .collect();
        let noun = if self.findings.len() == 1 {
            "finding"
        } else {
            "findings"
        };
        let _ = write!(out, "{}: {} {noun}", self.source, self.findings.len());
        if !counts.is_empty() {
            let _ = write!(out, " ({})", counts.join(", "));
        }
        out.push('\n');
        out
    }

    pub fn codes(&self) -> Vec<&str> {
        self.findings.iter().map(|f| f.code.as_str()).collect()
    }
}
