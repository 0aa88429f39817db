//! Pattern matching with negative application conditions, single rule
//! application, and priority-ordered execution to a fixpoint.

mod apply;
mod iso;
mod matcher;
mod pattern;
mod rule;

pub use apply::{apply_rule, run_scheduled, run_to_fixpoint, schedule, Firing, FixpointOutcome};
pub use iso::is_isomorphic;
pub use matcher::{embeds, find_matches, nac_holds, Match};
pub use pattern::{AttrConstraint, Comparator, Operand, Pattern, PatternEdge, PatternNode};
pub use rule::{RhsAdditions, RhsNode, Rule};

use thiserror::Error;

use crate::graph::GraphError;

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("rule {rule}: NAC {nac} is violated at this match")]
    NacViolated { rule: String, nac: usize },
    #[error("rule {rule}: match no longer embeds in the host graph")]
    InvalidMatch { rule: String },
    #[error("rule {0} has no Fault node on its right-hand side")]
    InvalidRule(String),
    #[error("more than {budget} rule applications")]
    IterationBudgetExceeded { budget: usize },
    #[error(transparent)]
    Graph(GraphError),
}
