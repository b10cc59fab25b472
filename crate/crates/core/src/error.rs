use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension profile: {0}")]
    InvalidProfile(String),

    #[error("total dimension {total} exceeds the supported maximum {max}")]
    ProfileTooLarge { total: usize, max: usize },

    #[error("expected {expected} amplitudes, found {found}")]
    ShapeMismatch { expected: usize, found: usize },

    #[error("non-finite amplitude at linear index {0}")]
    NonFinite(usize),

    #[error("all-zero tensor (squared norm {norm_sq:e})")]
    AllZeroTensor { norm_sq: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix for mode {mode} is not unitary (deviation {deviation:e})")]
    NotUnitary { mode: usize, deviation: f64 },

    #[error("weight {0} outside the open interval (0, 1)")]
    InvalidWeight(f64),

    #[error("eigenvectors are not orthogonal (|<E1|E2>| = {overlap:e})")]
    NotOrthogonal { overlap: f64 },

    #[error("matrix is not Hermitian (deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace {trace} differs from 1")]
    BadTrace { trace: f64 },

    #[error("matrix has negative eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("density matrix is not rank two (spectrum {spectrum:?})")]
    NotRankTwo { spectrum: Vec<f64> },

    #[error("density matrix is rank one (second eigenvalue {second:e})")]
    RankOne { second: f64 },

    #[error("concurrence paths disagree: minor sum {minor_sum:e} vs invariant form {invariant_form:e}")]
    FormulaMismatch {
        minor_sum: f64,
        invariant_form: f64,
    },

    #[error("state is not fully separable (concurrence {concurrence:e})")]
    NotSeparable { concurrence: f64 },

    #[error("eigenvector amplitudes are not real (max imaginary part {max_imag:e})")]
    NotRealCoefficients { max_imag: f64 },

    #[error("state is not the canonical maximally entangled vector (fidelity {fidelity})")]
    NotMaximallyEntangled { fidelity: f64 },

    #[error("the two product states coincide up to phase")]
    IdenticalStates,

    #[error("state is not a product state")]
    NotProduct,

    #[error("oracle refused total dimension {total} (limit {limit})")]
    OracleTooLarge { total: usize, limit: usize },

    #[error("operation requires exactly {expected} modes, found {found}")]
    WrongModeCount { expected: usize, found: usize },

    #[error("numerical inconsistency: {0}")]
    NumericalInconsistency(String),
}
