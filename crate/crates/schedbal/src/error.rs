use thiserror::Error;

/// Crate-wide error type. Validation findings that callers are expected to
/// inspect one by one are reported as [`Violation`] lists instead; `Error` is
/// for conditions that stop an operation outright.
#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {}", format_violations(.0))]
    InvalidInstance(Vec<Violation>),

    #[error("infeasible schedule: {}", format_violations(.0))]
    InfeasibleSchedule(Vec<Violation>),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("bitstring has {got} bits, model has {expected} variables")]
    BitstringLength { got: usize, expected: usize },

    #[error("integer overflow while computing {0}")]
    Overflow(String),

    #[error("search space of {estimated} states exceeds the enumeration limit of {limit}")]
    SearchSpaceTooLarge { estimated: u128, limit: u128 },

    #[error("trace is not sorted by time with non-increasing energy")]
    UnsortedTrace,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

/// A single validation finding: which field or row is wrong, and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Path of the offending field, e.g. `jobs[2].processing` or `row pred_1`.
    pub field: String,
    pub message: String,
}

impl Violation {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { field: field.into(), message: message.into() }
    }
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

fn format_violations(violations: &[Violation]) -> String {
    if violations.is_empty() {
        return "unspecified".to_string();
    }
    violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ")
}
