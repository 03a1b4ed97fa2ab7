use thiserror::Error;

use crate::solver::Interpretation;
use crate::symmetry::Permutation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unsafe rule `{rule}`: variable {variable} is not bound by a positive body literal")]
    Unsafe { rule: String, variable: String },

    #[error("predicate {predicate} used with arities {first} and {second}")]
    ArityMismatch {
        predicate: String,
        first: usize,
        second: usize,
    },

    #[error("grounding blow-up: more than {limit} derivable atoms")]
    GroundingBlowUp { limit: usize },

    #[error("interpretation width {found} does not match atom table size {expected}")]
    WidthMismatch { expected: usize, found: usize },

    /// The search ran out of nodes; `found` holds the answer sets seen so far.
    #[error("search budget of {budget} nodes exhausted after {} answer sets", found.len())]
    Budget {
        budget: u64,
        found: Vec<Interpretation>,
    },

    #[error("group too large: closure exceeded {cap} elements")]
    GroupTooLarge {
        cap: usize,
        partial: Vec<Permutation>,
    },

    #[error("unknown atom {0}")]
    UnknownAtom(String),

    #[error("coverage of example {example} is indeterminate: {reason}")]
    Indeterminate { example: String, reason: String },

    #[error("unsatisfiable task: example {example} cannot be covered")]
    UnsatisfiableTask { example: String },

    #[error("hypothesis space has {count} candidates, above the limit of {limit}")]
    SpaceTooLarge { count: usize, limit: usize },

    #[error("hypothesis search exceeded its budget of {budget} nodes")]
    SearchBudget { budget: u64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("validation failed after {rounds} rounds; last failing instance: {instance}")]
    MaxRounds { rounds: usize, instance: String },

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Syntax {
            line,
            column,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
