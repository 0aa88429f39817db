//! Static fault detection for DQN-style deep reinforcement learning
//! programs.
//!
//! A program is parsed and turned into a model graph typed by the DRL
//! meta-model ([`extract`]); detection rules ([`rules`]) are applied to it
//! by a graph transformation engine ([`engine`]) until no rule applies, and
//! the Fault nodes left in the final graph become the report ([`report`]).

pub mod corpus;
pub mod engine;
pub mod extract;
pub mod graph;
pub mod report;
pub mod rules;
