//! Fixture manifest (`corpus/manifest.json`) and its consistency checks.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::extract::{parse, SourceUnit};
use crate::graph::ModelGraph;
use crate::rules::codes::detectable_codes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FixtureKind {
    Clean,
    Synthetic,
    RealRecreation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InjectedFault {
    pub fault_code: String,
    pub description: String,
    pub source_line_hint: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct ManifestEntry {
    pub path: String,
    pub kind: FixtureKind,
    #[serde(default)]
    pub injected_faults: Vec<InjectedFault>,
    pub expected_findings: Vec<String>,
    #[serde(default)]
    pub source_ref: Option<String>,
    #[serde(default)]
    pub expected_graph: Option<String>,
    /// Faults the post exhibits that no static rule can see.
    #[serde(default)]
    pub expected_misses: Vec<InjectedFault>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", deny_unknown_fields)]
pub struct Manifest {
    pub format_version: String,
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn of_kind(&self, kind: FixtureKind) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.kind == kind)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum CorpusViolation {
    MissingFile(String),
    Unparseable { path: String, message: String },
    BadExpectedGraph { path: String, message: String },
    InjectionMismatch { path: String },
    CleanWithFindings { path: String },
    UnknownCode { path: String, code: String },
    Uncovered(String),
}

impl fmt::Display for CorpusViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingFile(p) => write!(f, "{p}: file not found"),
            Self::Unparseable { path, message } => write!(f, "{path}: {message}"),
            Self::BadExpectedGraph { path, message } => {
                write!(f, "{path}: bad expected graph: {message}")
            }
            Self::InjectionMismatch { path } => {
                write!(
                    f,
                    "{path}: expected findings differ from injected fault codes"
                )
            }
            Self::CleanWithFindings { path } => write!(f, "{path}: clean fixture expects findings"),
            Self::UnknownCode { path, code } => write!(f, "{path}: unknown fault code {code}"),
            Self::Uncovered(code) => write!(f, "no fixture covers {code}"),
        }
    }
}

fn sorted(codes: impl IntoIterator<Item = impl AsRef<str>>) -> Vec<String> {
    let mut v: Vec<String> = codes.into_iter().map(|c| c.as_ref().to_string()).collect();
    v.sort();
    v
}

/// Checks a manifest whose paths are relative to `root`. Returns the
/// violations in a stable order; empty means the corpus is usable.
pub fn validate_corpus(manifest: &Manifest, root: &Path) -> Vec<CorpusViolation> {
    let mut out = Vec::new();
    let known: BTreeSet<&str> = detectable_codes().collect();
    for e in &manifest.entries {
        match SourceUnit::read(&root.join(&e.path)) {
            Err(_) => out.push(CorpusViolation::MissingFile(e.path.clone())),
            Ok(src) => {
                if let Err(err) = parse(&src) {
                    out.push(CorpusViolation::Unparseable {
                        path: e.path.clone(),
                        message: err.to_string(),
                    });
                }
            }
        }
        if let Some(g) = &e.expected_graph {
            match std::fs::read_to_string(root.join(g)) {
                Err(_) => out.push(CorpusViolation::MissingFile(g.clone())),
                Ok(text) => {
                    if let Err(err) = ModelGraph::from_json(&text) {
                        out.push(CorpusViolation::BadExpectedGraph {
                            path: g.clone(),
                            message: err.to_string(),
                        });
                    }
                }
            }
        }
        for code in &e.expected_findings {
            if !known.contains(code.as_str()) {
                out.push(CorpusViolation::UnknownCode {
                    path: e.path.clone(),
                    code: code.clone(),
                });
            }
        }
        match e.kind {
            FixtureKind::Synthetic => {
                if sorted(&e.expected_findings)
                    != sorted(e.injected_faults.iter().map(|f| &f.fault_code))
                {
                    out.push(CorpusViolation::InjectionMismatch {
                        path: e.path.clone(),
                    });
                }
            }
            FixtureKind::Clean => {
                if !e.expected_findings.is_empty() || !e.injected_faults.is_empty() {
                    out.push(CorpusViolation::CleanWithFindings {
                        path: e.path.clone(),
                    });
                }
            }
            FixtureKind::RealRecreation => {}
        }
    }
    let covered: BTreeSet<&str> = manifest
        .entries
        .iter()
        .flat_map(|e| e.expected_findings.iter().map(String::as_str))
        .collect();
    for code in known {
        if !covered.contains(code) {
            out.push(CorpusViolation::Uncovered(code.to_string()));
        }
    }
    out.sort();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(path: &str, kind: FixtureKind, injected: &[&str], expected: &[&str]) -> ManifestEntry {
        ManifestEntry {
            path: path.into(),
            kind,
            injected_faults: injected
                .iter()
                .map(|c| InjectedFault {
                    fault_code: c.to_string(),
                    description: String::new(),
                    source_line_hint: None,
                })
                .collect(),
            expected_findings: expected.iter().map(|c| c.to_string()).collect(),
            source_ref: None,
            expected_graph: None,
            expected_misses: Vec::new(),
        }
    }

    fn scratch(files: &[&str]) -> std::path::PathBuf {
        let dir = std::env::temp_dir().join(format!(
            "drlint-corpus-{}-{}",
            std::process::id(),
            files.join("-").replace(['/', '.'], "_")
        ));
        std::fs::create_dir_all(&dir).unwrap();
        for f in files {
            std::fs::write(dir.join(f), "x = 1\n").unwrap();
        }
        dir
    }

    fn full_coverage(mut entries: Vec<ManifestEntry>) -> Manifest {
        let codes: Vec<&str> = detectable_codes().collect();
        entries.push(entry("all.py", FixtureKind::RealRecreation, &[], &codes));
        Manifest {
            format_version: "1".into(),
            entries,
        }
    }

    #[test]
    fn consistent_manifest_passes() {
        let dir = scratch(&["a.py", "all.py"]);
        let m = full_coverage(vec![entry(
            "a.py",
            FixtureKind::Synthetic,
            &["F02", "F01"],
            &["F01", "F02"],
        )]);
        assert_eq!(validate_corpus(&m, &dir), vec![]);
    }

    #[test]
    fn injection_mismatch_is_one_violation() {
        let dir = scratch(&["b.py", "all.py"]);
        let m = full_coverage(vec![entry(
            "b.py",
            FixtureKind::Synthetic,
            &["F01"],
            &["F02"],
        )]);
        assert_eq!(
            validate_corpus(&m, &dir),
            vec![CorpusViolation::InjectionMismatch {
                path: "b.py".into()
            }]
        );
    }

    #[test]
    fn missing_coverage_names_the_code() {
        let dir = scratch(&["c.py"]);
        let codes: Vec<&str> = detectable_codes().filter(|c| *c != "F07").collect();
        let m = Manifest {
            format_version: "1".into(),
            entries: vec![entry("c.py", FixtureKind::RealRecreation, &[], &codes)],
        };
        assert_eq!(
            validate_corpus(&m, &dir),
            vec![CorpusViolation::Uncovered("F07".into())]
        );
    }

    #[test]
    fn missing_files_and_bad_clean_entries() {
        let dir = scratch(&["all.py"]);
        let m = full_coverage(vec![entry("gone.py", FixtureKind::Clean, &[], &["F01"])]);
        let v = validate_corpus(&m, &dir);
        assert!(v.contains(&CorpusViolation::MissingFile("gone.py".into())));
        assert!(v.contains(&CorpusViolation::CleanWithFindings {
            path: "gone.py".into()
        }));
    }
}
