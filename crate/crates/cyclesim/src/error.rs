//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong across the encoding, state, mapping,
/// builder and oracle layers.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid edge ({i},{k}): require 1 <= k < i <= {n}")]
    InvalidEdge { i: u32, k: u32, n: u32 },

    #[error("edge position {l} out of range 1..={e}")]
    PositionOutOfRange { l: u32, e: u32 },

    #[error("not a Hamiltonian cycle: {0}")]
    NotACycle(String),

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("register for n={n} needs {bits} edge bits; at most {max} supported")]
    RegisterTooWide { n: u32, bits: u32, max: u32 },

    #[error("malformed mask text: {0}")]
    MaskParse(String),

    #[error("vertex count {0} too small; the construction starts at the 3-cycle")]
    VertexCountTooSmall(u32),

    #[error("state already carries an ancilla register of width {0}")]
    AncillaAlreadyAttached(u32),

    #[error("operation needs an ancilla register but none is attached")]
    NoAncilla,

    #[error("ancilla width mismatch: expected {expected}, found {found}")]
    AncillaWidthMismatch { expected: u32, found: u32 },

    #[error("state level mismatch: expected {expected}, found {found}")]
    LevelMismatch { expected: u32, found: u32 },

    #[error("states live in different registers")]
    RegisterMismatch,

    #[error("projection has zero probability: no term matches the selected outcome")]
    ZeroProbability,

    #[error("operation needs an aux bit but none is attached")]
    NoAux,

    #[error("aux bit already attached")]
    AuxAlreadyAttached,

    #[error("aux bit must be 0 on every input term")]
    AuxNotCleared,

    #[error("ancilla must be all-zero before it can be detached")]
    AncillaNotZero,

    #[error("a state must hold at least one term")]
    EmptyState,

    #[error("term {0} has a zero coefficient")]
    ZeroCoefficient(String),

    #[error("duplicate term label {0}")]
    DuplicateTerm(String),

    #[error("exact arithmetic overflow in {0}")]
    ArithmeticOverflow(&'static str),

    #[error("level {m} does not fit the register for n={n}: the step inserts vertex {needed}")]
    LevelOutOfRange { m: u32, n: u32, needed: u32 },

    #[error("term budget exceeded: step needs {needed} live terms, budget is {budget}")]
    CapacityExceeded { needed: u128, budget: u64 },

    #[error("cycle enumeration is capped at m=10, got m={0}")]
    EnumerationTooLarge(u32),

    #[error("weight matrix rejected at row {row}, column {col}: {reason}")]
    WeightMatrix {
        row: usize,
        col: usize,
        reason: String,
    },

    #[error("weight input: {0}")]
    WeightParse(String),

    #[error("state JSON: {0}")]
    StateParse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
