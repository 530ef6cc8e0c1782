use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid arguments: {0}")]
    InvalidArguments(String),

    #[error("sector of dimension {size} exceeds the sector-size cap {cap}")]
    SectorTooLarge { size: u128, cap: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("operator is not Hermitian (max deviation {0:e})")]
    NonHermitian(f64),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("term `{term}` has Pauli weight {weight}, at most 2 is allowed")]
    WeightViolation { term: String, weight: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("linear system is rank deficient (smallest singular value {0:e})")]
    RankDeficient(f64),

    #[error("operator lies outside the observable span (residual {0:e})")]
    OutsideSpan(f64),

    #[error("target lies inside K up to tolerance (distance {distance:e}, tolerance {tol:e})")]
    PointInside { distance: f64, tol: f64 },

    #[error("ellipsoid shape matrix lost positive definiteness")]
    DegenerateShape,

    #[error("witness has {have} blocks, the observable schedule needs {need}")]
    InsufficientBlocks { need: usize, have: usize },

    #[error("simulation needs {qubits} qubits, cap is {cap}")]
    QubitCap { qubits: usize, cap: usize },
}

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}
