use std::sync::OnceLock;

use super::{AttrKind, TypeGraph};

/// Node type identifiers of the DRL meta-model.
pub mod node_type {
    pub const PROGRAM: &str = "DRLProgram";
    pub const ENVIRONMENT: &str = "Environment";
    pub const INITIALIZE: &str = "Initialize";
    pub const STEP: &str = "Step";
    pub const TERMINAL_CHECK: &str = "TerminalCheck";
    pub const RESET: &str = "Reset";
    pub const CLOSE: &str = "Close";
    pub const DQN: &str = "DQN";
    pub const Q_NETWORK: &str = "QNetwork";
    pub const TARGET_NETWORK: &str = "TargetNetwork";
    pub const EXPLORATION: &str = "Exploration";
    pub const HYPERPARAMETERS: &str = "Hyperparameters";
    pub const UPDATE_RULE: &str = "UpdateRule";
    pub const FAULT: &str = "Fault";

    pub const ALL: [&str; 14] = [
        PROGRAM,
        ENVIRONMENT,
        INITIALIZE,
        STEP,
        TERMINAL_CHECK,
        RESET,
        CLOSE,
        DQN,
        Q_NETWORK,
        TARGET_NETWORK,
        EXPLORATION,
        HYPERPARAMETERS,
        UPDATE_RULE,
        FAULT,
    ];
}

/// Edge labels of the DRL meta-model.
pub mod edge_label {
    pub const HAS_ENV: &str = "hasEnv";
    pub const HAS_AGENT: &str = "hasAgent";
    pub const INITIALIZED_BY: &str = "initializedBy";
    pub const FOLLOWED_BY: &str = "followedBy";
    pub const NEXT: &str = "next";
    pub const CHECKED_BY: &str = "checkedBy";
    pub const RESET_BY: &str = "resetBy";
    pub const CLOSED_BY: &str = "closedBy";
    pub const FEEDS_STATE: &str = "feedsState";
    pub const YIELDS_ACTION: &str = "yieldsAction";
    pub const OWNS: &str = "owns";
    pub const PROVIDES_TARGETS: &str = "providesTargets";
    pub const SYNCS_TO: &str = "syncsTo";
    pub const EXPLORES: &str = "explores";
    pub const CONFIGURED_BY: &str = "configuredBy";
    pub const TRAINED_BY: &str = "trainedBy";
    pub const FLAGGED: &str = "flagged";
    /// Fault -> the element the fault was detected at.
    pub const MARKS: &str = "marks";
}

/// The type graph governing every extracted model.
pub fn drl_meta_model() -> &'static TypeGraph {
    static META: OnceLock<TypeGraph> = OnceLock::new();
    META.get_or_init(build)
}

fn build() -> TypeGraph {
    use edge_label::*;
    use node_type::*;
    use AttrKind::*;

    let mut b = TypeGraph::builder()
        .node(PROGRAM, &[])
        .node(
            ENVIRONMENT,
            &[("numActions", Integer), ("numStates", Integer)],
        )
        .node(INITIALIZE, &[])
        .node(STEP, &[])
        .node(TERMINAL_CHECK, &[])
        .node(RESET, &[])
        .node(CLOSE, &[])
        .node(DQN, &[])
        .node(
            Q_NETWORK,
            &[("outputDim", Integer), ("outputActivation", String)],
        )
        .node(TARGET_NETWORK, &[("syncFrequency", Integer)])
        .node(
            EXPLORATION,
            &[("epsilon", Real), ("epsilonFinal", Real), ("decay", Real)],
        )
        .node(
            HYPERPARAMETERS,
            &[
                ("batchSize", Integer),
                ("epochs", Integer),
                ("replayBufferSize", Integer),
            ],
        )
        .node(UPDATE_RULE, &[("gamma", Real), ("hasMaxTerm", Boolean)])
        .node(FAULT, &[("code", String), ("message", String)])
        .edge(HAS_ENV, PROGRAM, ENVIRONMENT)
        .edge(HAS_AGENT, PROGRAM, DQN)
        .edge(INITIALIZED_BY, ENVIRONMENT, INITIALIZE)
        .edge(FOLLOWED_BY, INITIALIZE, STEP)
        .edge(NEXT, STEP, STEP)
        .edge(CHECKED_BY, STEP, TERMINAL_CHECK)
        .edge(RESET_BY, ENVIRONMENT, RESET)
        .edge(CLOSED_BY, ENVIRONMENT, CLOSE)
        .edge(FEEDS_STATE, STEP, Q_NETWORK)
        .edge(YIELDS_ACTION, Q_NETWORK, STEP)
        .edge(OWNS, DQN, Q_NETWORK)
        .edge(OWNS, DQN, TARGET_NETWORK)
        .edge(PROVIDES_TARGETS, TARGET_NETWORK, Q_NETWORK)
        .edge(SYNCS_TO, Q_NETWORK, TARGET_NETWORK)
        .edge(EXPLORES, DQN, EXPLORATION)
        .edge(CONFIGURED_BY, DQN, HYPERPARAMETERS)
        .edge(TRAINED_BY, Q_NETWORK, UPDATE_RULE)
        .edge(FLAGGED, PROGRAM, FAULT);
    for ty in ALL.iter().filter(|t| **t != FAULT) {
        b = b.edge(MARKS, FAULT, ty);
    }
    b.build().expect("DRL meta-model is well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn meta_model_declares_every_component() {
        let tg = drl_meta_model();
        for ty in node_type::ALL {
            assert!(tg.has_node_type(ty), "{ty}");
        }
        assert_eq!(tg.attr_kind("Exploration", "decay"), Some(AttrKind::Real));
        assert_eq!(tg.attr_kind("Environment", "decay"), None);
        assert!(tg.has_edge_type("owns", "DQN", "TargetNetwork"));
        assert!(tg.has_edge_type("marks", "Fault", "Step"));
        assert!(!tg.has_edge_type("marks", "Fault", "Fault"));
        assert!(!tg.has_edge_type("followedBy", "Step", "Initialize"));
    }
}
