use crate::lp::LpError;
use crate::operator::QubitSet;

/// Errors raised across the crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("qubit label {0} is out of range (labels must be < 32)")]
    LabelOutOfRange(usize),
    #[error("duplicate qubit label {0}")]
    DuplicateLabel(usize),
    #[error("operator on {0} qubits exceeds the dense cap of {max}", max = crate::operator::MAX_QUBITS)]
    TooManyQubits(usize),
    #[error("{what}: n = {n} exceeds the cap of {cap}")]
    CapExceeded { what: &'static str, n: usize, cap: usize },
    #[error("matrix of shape {rows}x{cols} does not match a support of {qubits} qubits")]
    DimensionMismatch { rows: usize, cols: usize, qubits: usize },
    #[error("supports {0:?} and {1:?} overlap")]
    OverlappingSupports(QubitSet, QubitSet),
    #[error("{keep:?} is not a subset of the support {support:?}")]
    NotSubset { keep: QubitSet, support: QubitSet },
    #[error("operator supports differ: {0:?} vs {1:?}")]
    SupportMismatch(QubitSet, QubitSet),
    #[error("matrix is not Hermitian (relative deviation {0:e})")]
    NotHermitian(f64),
    #[error("not a density matrix: {0}")]
    InvalidState(String),
    #[error("operator is not traceless (trace {0:e})")]
    NotTraceless(f64),
    #[error("logarithm undefined: minimum eigenvalue {0:e} is not strictly positive")]
    NonPositiveSpectrum(f64),
    #[error("support of the first state is not contained in the support of the second (leak {0:e})")]
    SupportViolation(f64),
    #[error("invalid penalty schedule: {0}")]
    InvalidSchedule(String),
    #[error("inconsistent local decomposition: terms differ from target by {0:e}")]
    InconsistentDecomposition(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
