use thiserror::Error;

/// Errors raised across the library.
///
/// Hypothesis violations (`RationalRatio`, `DeltaZero`, `NotUnimodular`) are
/// distinguished from per-run failures so front ends can map them to
/// different exit codes; see [`Error::is_hypothesis_violation`].
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid real literal `{0}`: {1}")]
    InvalidSpec(String, String),

    #[error("precision exhausted: requested {requested} bits, only {available} available")]
    PrecisionExhausted { requested: u32, available: u32 },

    #[error("division by an interval containing zero")]
    DivisionByZero,

    #[error("beta/delta is rational; the construction requires an irrational ratio")]
    RationalRatio,

    #[error("delta = 0; the construction requires delta != 0")]
    DeltaZero,

    #[error("matrix is not unimodular: |det - 1| exceeds {tolerance}")]
    NotUnimodular { tolerance: String },

    #[error("convergent index {nu} out of range (expanded {available})")]
    OutOfRange { nu: usize, available: usize },

    #[error("no prime in [{lo}, {hi}]")]
    NoPrimeInInterval { lo: String, hi: String },

    #[error("exhaustive search too large: {candidates} candidates exceeds guard {guard}")]
    TooLarge { candidates: String, guard: u64 },

    #[error("eta_1 is zero after column normalization")]
    Eta1Zero,

    #[error("H_{index} is not certified nonzero")]
    HZero { index: usize },

    #[error("box solver found no solution at nu = {nu}")]
    SolverFailed { nu: usize },

    #[error("residual recomputation disagrees with the pipeline value")]
    ResidualMismatch,

    #[error("no primitive pair in window: {0}")]
    NoPairInWindow(String),

    #[error("horizon too small: achieved |t| = {achieved_t}, horizon T = {horizon}")]
    HorizonTooSmall { achieved_t: String, horizon: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("fit is degenerate: {0}")]
    Degenerate(String),

    #[error("comparison indistinguishable at {bits} bits")]
    Indistinguishable { bits: u32 },

    #[error("{path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    /// True for violations of the theorem hypotheses (det = 1, delta != 0,
    /// beta/delta irrational).
    pub fn is_hypothesis_violation(&self) -> bool {
        matches!(
            self,
            Error::RationalRatio | Error::DeltaZero | Error::NotUnimodular { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
