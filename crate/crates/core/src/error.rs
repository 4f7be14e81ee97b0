use thiserror::Error;

use crate::egraph::EClassId;

/// Errors raised by model parsing, arrangement generation and the search loop.
#[derive(Debug, Error)]
pub enum Error {
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid model: {0}")]
    Invariant(String),

    #[error("duplicate {kind} identifier `{id}`")]
    DuplicateId { kind: &'static str, id: String },

    #[error("gene {gene} is out of range for connector `{connector}` ({variants} variants)")]
    GeneOutOfRange {
        connector: String,
        gene: u32,
        variants: usize,
    },

    #[error("design vector has {got} genes but the model has {expected} connectors")]
    GeneCount { got: usize, expected: usize },

    #[error("part `{0}` does not fit any compatible stock")]
    Unpackable(String),

    #[error("invalid packing: {0}")]
    InvalidPacking(String),

    #[error("invalid cut order: {0}")]
    InvalidCutOrder(String),

    #[error("e-class {0} is not live")]
    DeadClass(EClassId),

    #[error("root key mismatch: design does not instantiate the bag of parts of e-class {0}")]
    RootKeyMismatch(EClassId),

    #[error("e-class {0} is protected and cannot be removed")]
    Protected(EClassId),

    #[error("cycle through e-class {0} while decoding genome")]
    Cycle(EClassId),

    #[error("invalid genome: {0}")]
    InvalidGenome(String),

    #[error("cannot select {requested} solutions from a population of {available}")]
    SelectionTooLarge { requested: usize, available: usize },

    #[error("hypervolume supports 2 or 3 objectives, got {0}")]
    Dimension(usize),

    #[error("oracle budget exceeded: {0}")]
    BudgetExceeded(String),

    #[error("invalid parameter: {0}")]
    Param(String),

    #[error("internal invariant violated: {0}")]
    Violation(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
