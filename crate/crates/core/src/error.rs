use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not Hermitian (deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("matrix is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),
    #[error("operator is not a Hermitian projection (deviation {0:.3e})")]
    NotProjection(f64),
    #[error("matrix is rank deficient (smallest singular value {0:.3e})")]
    RankDeficient(f64),
    #[error("Kraus condition violated (deviation {0:.3e})")]
    KrausCondition(f64),
    #[error("map is not trace preserving (deviation {0:.3e})")]
    NotTracePreserving(f64),
    #[error("invalid Choi state: {0}")]
    InvalidChoi(String),
    #[error("invalid density operator: {0}")]
    InvalidDensity(String),
    #[error("Hamiltonian is not traceless (trace {0:.3e})")]
    NotTraceless(f64),
    #[error("dimension {0} is not a power of two")]
    NotPowerOfTwo(usize),
    #[error("index {index} out of range for a set of {len} pulses")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("enumeration of {requested} sequences exceeds the cap of {cap}")]
    EnumerationCap { requested: u128, cap: u128 },
    #[error("identity check `{check}` violated by {deviation:.3e}")]
    IdentityViolated { check: &'static str, deviation: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("statistic `{name}` failed on trajectory {ordinal}: {source}")]
    Statistic {
        name: String,
        ordinal: u64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
