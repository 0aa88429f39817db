mod support;

use std::collections::{BTreeMap, BTreeSet};

use drlint::corpus::{validate_corpus, FixtureKind};
use drlint::engine::run_to_fixpoint;
use drlint::extract::SourceUnit;
use drlint::graph::{conforms_to, drl_meta_model, edge_label, node_type};
use drlint::report::{lint, lint_detailed};
use drlint::rules::codes::detectable_codes;
use drlint::rules::{builtin_rules, rule_family};

use support::{corpus_root, corpus_source, fixture_source, manifest, EXTRA_FIXTURES};

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

#[test]
fn shipped_corpus_is_consistent() {
    assert_eq!(validate_corpus(&manifest(), &corpus_root()), vec![]);
}

#[test]
fn every_corpus_entry_gets_its_expected_findings() {
    let rules = builtin_rules();
    for e in manifest().entries {
        let report = lint(&corpus_source(&e.path), &rules).unwrap();
        let got = sorted(report.codes().iter().map(|c| c.to_string()).collect());
        assert_eq!(got, sorted(e.expected_findings.clone()), "{}", e.path);
    }
}

#[test]
fn extra_fixtures_get_their_findings() {
    let rules = builtin_rules();
    for (file, codes) in EXTRA_FIXTURES {
        let report = lint(&fixture_source(file), &rules).unwrap();
        assert_eq!(report.codes(), codes.to_vec(), "{file}");
    }
}

#[test]
fn two_unguarded_steps_are_reported_at_each_step() {
    let src = fixture_source("two_unguarded_steps.py");
    let report = lint(&src, &builtin_rules()).unwrap();
    for f in &report.findings {
        let line = src.line_text(f.line.unwrap()).unwrap();
        assert!(line.contains("env.step("), "{line}");
    }
    assert_ne!(report.findings[0].line, report.findings[1].line);
}

/// Every detectable code has a synthetic fixture and every synthetic fixture
/// injects exactly one code.
#[test]
fn synthetic_coverage_is_a_bijection_on_codes() {
    let mut by_code: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for e in manifest().of_kind(FixtureKind::Synthetic) {
        assert_eq!(e.injected_faults.len(), 1, "{}", e.path);
        by_code
            .entry(e.injected_faults[0].fault_code.clone())
            .or_default()
            .push(e.path.clone());
    }
    let codes: BTreeSet<&str> = by_code.keys().map(String::as_str).collect();
    assert_eq!(codes, detectable_codes().collect::<BTreeSet<_>>());
}

fn clean_with(from: &str, to: &str) -> SourceUnit {
    let src = corpus_source("clean/cartpole_dqn.py");
    assert!(src.text.contains(from), "{from}");
    SourceUnit::new("variant.py", src.text.replacen(from, to, 1))
}

/// Variants no corpus fixture exercises, each triggered by one edit of the
/// clean program.
#[test]
fn remaining_variants_fire_on_single_edits() {
    let rules = builtin_rules();
    let cases = [
        ("gamma = 0.95", "gamma = 0.0", "R06a"),
        ("target_update = 100", "target_update = 0", "R07a"),
        (
            "Dense(action_size, activation=\"linear\"))\nmodel.compile",
            "Dense(action_size, activation=\"sigmoid\"))\nmodel.compile",
            "R11a",
        ),
        (
            "Dense(action_size, activation=\"linear\"))\nmodel.compile",
            "Dense(action_size, activation=\"tanh\"))\nmodel.compile",
            "R11b",
        ),
    ];
    for (from, to, rule) in cases {
        let outcome = lint_detailed(&clean_with(from, to), &rules).unwrap();
        let fired: Vec<&str> = outcome.firings.iter().map(|f| f.rule_id.as_str()).collect();
        assert_eq!(fired, [rule], "{to}");
    }
}

#[test]
fn every_rule_variant_is_exercised() {
    let rules = builtin_rules();
    let mut fired = BTreeSet::new();
    let mut sources: Vec<SourceUnit> = manifest()
        .entries
        .iter()
        .map(|e| corpus_source(&e.path))
        .collect();
    sources.push(clean_with("gamma = 0.95", "gamma = 0.0"));
    sources.push(clean_with("target_update = 100", "target_update = 0"));
    sources.push(clean_with(
        "activation=\"linear\"))\nmodel.compile",
        "activation=\"sigmoid\"))\nmodel.compile",
    ));
    sources.push(clean_with(
        "activation=\"linear\"))\nmodel.compile",
        "activation=\"tanh\"))\nmodel.compile",
    ));
    for src in &sources {
        for f in lint_detailed(src, &rules).unwrap().firings {
            fired.insert(f.rule_id);
        }
    }
    let all: BTreeSet<String> = rules.iter().map(|r| r.id.clone()).collect();
    assert_eq!(fired, all);
    let families: BTreeSet<&str> = all.iter().map(|id| rule_family(id)).collect();
    assert_eq!(families.len(), 10);
}

#[test]
fn final_graphs_conform_and_faults_are_wired() {
    let rules = builtin_rules();
    for src in support::all_sources() {
        let outcome = lint_detailed(&src, &rules).unwrap();
        let g = &outcome.graph;
        assert_eq!(conforms_to(g, drl_meta_model()), vec![], "{}", src.path);
        let program = g.program_node().unwrap();
        for f in g.nodes_of_type(node_type::FAULT) {
            assert!(g.has_edge(edge_label::FLAGGED, program, f.id));
            let marked: Vec<_> = g
                .out_edges(f.id)
                .filter(|e| e.label == edge_label::MARKS)
                .collect();
            assert_eq!(marked.len(), 1, "{}", src.path);
            assert_eq!(f.line, g.node(marked[0].dst).unwrap().line);
        }
        assert_eq!(
            g.node_count(),
            outcome.model.node_count() + outcome.firings.len()
        );
    }
}

#[test]
fn fixpoint_rerun_adds_nothing() {
    let rules = builtin_rules();
    for src in support::all_sources() {
        let first = lint_detailed(&src, &rules).unwrap().graph;
        let again = run_to_fixpoint(&rules, &first).unwrap();
        assert!(again.firings.is_empty(), "{}", src.path);
        assert_eq!(again.graph.to_json(), first.to_json());
    }
}

#[test]
fn syntax_errors_surface_as_lint_errors() {
    let err = lint(&SourceUnit::new("bad.py", "for x in\n"), &builtin_rules()).unwrap_err();
    assert!(
        err.to_string()
            .starts_with("bad.py: syntax error at line 1"),
        "{err}"
    );
}
