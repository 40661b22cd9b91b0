use thiserror::Error;

/// Errors raised by the construction, analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported field degree m={0} (expected 1..=10)")]
    FieldDegree(u32),

    #[error("polynomial {poly:#x} rejected for GF(2^{m}): {reason}")]
    NotPrimitive { poly: u32, m: u32, reason: String },

    #[error("the zero element has no companion matrix")]
    ZeroElement,

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("illegal merge set: {0}")]
    IllegalMerge(String),

    #[error("infeasible geometry: {0}")]
    Infeasible(String),

    #[error("inconsistent code matrices: {0}")]
    InconsistentMatrices(String),

    #[error("base matrix is not in encoder form (H_inf | h_0 | H_bd): {0}")]
    NotEncoderForm(String),

    #[error("parity part of the lifted code is singular; the labeling cannot be encoded")]
    SingularParity,

    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),

    #[error("invalid channel parameters: {0}")]
    InvalidChannel(String),

    #[error("r0 equation has no root: left side rises to {limit:.6e} (needs 1) for r in [{lo:.6}, {hi:.6e}]")]
    NoRoot { lo: f64, hi: f64, limit: f64 },

    #[error("spectrum has {got} coefficients but block length {n} needs {}", n + 1)]
    SpectrumLength { got: usize, n: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
