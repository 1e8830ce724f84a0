use thiserror::Error;

/// Errors raised by the toolkit's constructors, checks and solvers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid state space: {0}")]
    InvalidSpace(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("invalid path: {0}")]
    InvalidPath(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("time index {index} out of range (last index {last})")]
    IndexOutOfRange { index: usize, last: usize },
    #[error("operation requires a {expected} grid")]
    Mode { expected: &'static str },
    #[error("measures do not share the same space and grid")]
    Mismatch,
    #[error("event has zero mass")]
    ZeroMass,
    #[error("invalid observable: {0}")]
    InvalidObservable(String),
    #[error("invalid event: {0}")]
    InvalidEvent(String),
    #[error("flow does not preserve the marginal (deviation {deviation:e})")]
    NotMeasurePreserving { deviation: f64 },
    #[error("horizon {horizon} too short: must exceed {required}")]
    HorizonTooShort { horizon: f64, required: f64 },
    #[error("measure is not incompressible (deviation {deviation:e})")]
    NotIncompressible { deviation: f64 },
    #[error("measure is not shift-invariant (defect {defect:e})")]
    NotShiftInvariant { defect: f64 },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("state space too large for exhaustive scan: {0}")]
    ScanTooLarge(String),
    #[error("map is not a bijection on cells: {0}")]
    NotBijective(String),
    #[error("invalid final configuration: {0}")]
    InvalidCoupling(String),
    #[error("path enumeration needs {paths} paths, cap is {cap}; use a coarser grid")]
    EnumerationCap { paths: u128, cap: u128 },
    #[error("linear program is infeasible")]
    Infeasible,
    #[error("linear program solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
