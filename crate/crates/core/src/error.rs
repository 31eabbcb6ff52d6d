use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("qubit index {index} out of range for {qubits} qubits")]
    IndexOutOfRange { index: usize, qubits: usize },

    #[error("matrix is not unitary (max deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("predicate of arity {arity} applied to {wires} wires")]
    ArityMismatch { arity: usize, wires: usize },

    #[error("wire {0} appears more than once")]
    OverlappingWires(usize),

    #[error("not a permutation of 0..{}: {0:?}", .0.len())]
    NotBijection(Vec<usize>),

    #[error("{what} needs {needed} qubits, budget is {limit}")]
    BudgetExceeded {
        what: String,
        needed: usize,
        limit: usize,
    },

    #[error("dimension mismatch: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(usize, usize, usize, usize),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{0} is not prime")]
    NotPrime(usize),

    #[error("bitstring {text:?} is not a valid {n}-bit string")]
    BadBitstring { text: String, n: usize },

    #[error("set is empty")]
    EmptySet,

    #[error("set mixes parities: {first} and {second}")]
    MixedParity { first: String, second: String },

    #[error("duplicate member {0}")]
    DuplicateMember(String),

    #[error("set of size {size} is below 2^(n-c) = {needed}")]
    SetTooSmall { size: String, needed: String },

    #[error("span deficiency: rank {rank} < n - c = {needed}")]
    SpanDeficiency { rank: usize, needed: usize },

    #[error("no covering subspace of dimension <= {0} exists")]
    NoCovering(usize),

    #[error("gamma1 = {0} is outside (0, 1/2), the domain of compute_m")]
    Gamma1OutOfDomain(f64),

    #[error("gamma1 = {0} exceeds 1/16; the grid bounds are not claimed here")]
    Gamma1TooLarge(f64),

    #[error("gate {0} is not a classical (basis-permuting) gate")]
    NotClassical(String),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
