use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("side length {side} is not divisible by {modulus}")]
    Divisibility { side: usize, modulus: usize },
    #[error("invalid dimension: {0}")]
    Dimension(String),
    #[error("enumeration budget exceeded: {needed} candidates > budget {budget}")]
    Budget { needed: u128, budget: u128 },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("circuit structure: {0}")]
    Structure(String),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cannot decompose error with detectors {detectors:?}")]
    Decomposition { detectors: Vec<u32> },
    #[error("flagged node {0} cannot reach any partner")]
    UnreachableNode(usize),
    #[error("no matching exists with observable parity {parity}")]
    InfeasibleClass { parity: u8 },
    #[error("empty input")]
    EmptyInput,
    #[error("distribution mismatch: {0}")]
    Mismatch(String),
    #[error("degenerate data: {0}")]
    DegenerateData(String),
    #[error("no layout meets target {0:e}")]
    Infeasible(f64),
    #[error("scale guard: {0}")]
    ScaleGuard(String),
}

impl Error {
    /// Stable machine-readable name for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Divisibility { .. } => "DivisibilityError",
            Error::Dimension(_) => "DimensionError",
            Error::Budget { .. } => "BudgetError",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::Parameter(_) => "ParameterError",
            Error::Structure(_) => "StructureError",
            Error::Parse { .. } => "ParseError",
            Error::Decomposition { .. } => "DecompositionError",
            Error::UnreachableNode(_) => "UnreachableNode",
            Error::InfeasibleClass { .. } => "InfeasibleClass",
            Error::EmptyInput => "EmptyInput",
            Error::Mismatch(_) => "MismatchError",
            Error::DegenerateData(_) => "DegenerateData",
            Error::Infeasible(_) => "Infeasible",
            Error::ScaleGuard(_) => "ScaleGuardError",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
