//! Front end: a parser for the supported Python subset and the mapping
//! from recognised Gym/Keras constructs to a model graph.

pub mod ast;
mod lexer;
mod mapping;
mod parser;

pub use mapping::KNOWN_ENVIRONMENTS;

use std::path::Path;

use thiserror::Error;

use crate::graph::ModelGraph;
use ast::Module;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at line {line}, column {column}: {message}")]
pub struct SyntaxError {
    pub line: u32,
    pub column: u32,
    pub message: String,
}

/// A program to lint.
#[derive(Debug, Clone)]
pub struct SourceUnit {
    pub path: String,
    pub text: String,
    line_starts: Vec<usize>,
}

impl SourceUnit {
    pub fn new(path: impl Into<String>, text: impl Into<String>) -> Self {
        let text = text.into();
        let line_starts = std::iter::once(0)
            .chain(text.match_indices('\n').map(|(i, _)| i + 1))
            .filter(|&i| i < text.len())
            .collect();
        SourceUnit {
            path: path.into(),
            text,
            line_starts,
        }
    }

    pub fn read(path: &Path) -> std::io::Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::new(path.display().to_string(), text))
    }

    /// Number of lines holding at least one character.
    pub fn line_count(&self) -> u32 {
        self.line_starts.len() as u32
    }

    /// 1-based (line, column) of a byte offset.
    pub fn position(&self, offset: usize) -> (u32, u32) {
        let line = self.line_starts.partition_point(|&s| s <= offset).max(1);
        let start = self.line_starts.get(line - 1).copied().unwrap_or(0);
        (line as u32, (offset.saturating_sub(start) + 1) as u32)
    }

    pub fn line_text(&self, line: u32) -> Option<&str> {
        let start = *self.line_starts.get(line.checked_sub(1)? as usize)?;
        let rest = &self.text[start..];
        Some(
            rest.split('\n')
                .next()
                .unwrap_or(rest)
                .trim_end_matches('\r'),
        )
    }
}

pub fn parse(source: &SourceUnit) -> Result<Module, SyntaxError> {
    parser::parse_text(&source.text)
}

/// Parses `source` and builds its model graph under the DRL meta-model.
pub fn extract_model(source: &SourceUnit) -> Result<ModelGraph, SyntaxError> {
    let module = parse(source)?;
    Ok(mapping::build_model(&module, source.line_count() > 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{conforms_to, drl_meta_model, edge_label, node_type};

    #[test]
    fn line_index() {
        let s = SourceUnit::new("a.py", "ab\ncd\n\nx");
        assert_eq!(s.line_count(), 4);
        assert_eq!(s.position(0), (1, 1));
        assert_eq!(s.position(4), (2, 2));
        assert_eq!(s.position(7), (4, 1));
        assert_eq!(s.line_text(2), Some("cd"));
        assert_eq!(s.line_text(5), None);
    }

    #[test]
    fn make_only_program() {
        let src = SourceUnit::new("m.py", "import gym\nenv = gym.make(\"CartPole-v0\")\n");
        let g = extract_model(&src).unwrap();
        let types: Vec<&str> = g.nodes().map(|n| n.ty.as_str()).collect();
        assert_eq!(
            types,
            [
                node_type::PROGRAM,
                node_type::ENVIRONMENT,
                node_type::INITIALIZE
            ]
        );
        let labels: Vec<&str> = g.edges().map(|e| e.label.as_str()).collect();
        assert_eq!(labels, [edge_label::HAS_ENV, edge_label::INITIALIZED_BY]);
        assert!(conforms_to(&g, drl_meta_model()).is_empty());
        assert_eq!(g.nodes().nth(1).unwrap().line, Some(2));
    }

    #[test]
    fn empty_source_has_only_the_program_node() {
        let g = extract_model(&SourceUnit::new("e.py", "")).unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.nodes().next().unwrap().line, None);
    }

    #[test]
    fn syntax_errors_propagate() {
        let e = extract_model(&SourceUnit::new("bad.py", "def f(:")).unwrap_err();
        assert_eq!(e.line, 1);
    }
}
