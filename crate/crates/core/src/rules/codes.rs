/// A leaf of the DRL fault taxonomy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FaultCode {
    pub code: &'static str,
    pub title: &'static str,
    pub taxonomy_type: u8,
}

const REGISTRY: [FaultCode; 11] = [
    FaultCode {
        code: "F01",
        title: "Missing stepping the environment",
        taxonomy_type: 1,
    },
    FaultCode {
        code: "F02",
        title: "Missing terminal state",
        taxonomy_type: 2,
    },
    FaultCode {
        code: "F03",
        title: "Missing reset/close environment",
        taxonomy_type: 3,
    },
    FaultCode {
        code: "F04",
        title: "Missing exploration",
        taxonomy_type: 4,
    },
    FaultCode {
        code: "F05",
        title: "Suboptimal exploration rate",
        taxonomy_type: 5,
    },
    FaultCode {
        code: "F06",
        title: "Wrong update rule",
        taxonomy_type: 6,
    },
    FaultCode {
        code: "F07",
        title: "Suboptimal network update frequency",
        taxonomy_type: 7,
    },
    FaultCode {
        code: "F08",
        title: "Wrong network update",
        taxonomy_type: 8,
    },
    // Needs dynamic analysis; no static rule exists for it.
    FaultCode {
        code: "F09",
        title: "Wrong calculation of gradients",
        taxonomy_type: 9,
    },
    FaultCode {
        code: "F10",
        title: "Wrong output",
        taxonomy_type: 10,
    },
    FaultCode {
        code: "F11",
        title: "Wrong activation for output",
        taxonomy_type: 11,
    },
];

/// Title reported for user-defined (`X`-prefixed) codes.
pub const USER_RULE_TITLE: &str = "User-defined rule";

pub fn fault_codes() -> &'static [FaultCode] {
    &REGISTRY
}

pub fn lookup(code: &str) -> Option<&'static FaultCode> {
    REGISTRY.iter().find(|f| f.code == code)
}

/// Codes that have a built-in detection rule.
pub fn detectable_codes() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|f| f.code).filter(|c| *c != "F09")
}

pub fn is_user_code(code: &str) -> bool {
    code.len() > 1 && code.starts_with('X')
}

pub fn title_for(code: &str) -> &'static str {
    lookup(code).map_or(USER_RULE_TITLE, |f| f.title)
}
