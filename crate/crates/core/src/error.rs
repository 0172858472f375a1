use thiserror::Error;

/// Errors shared by every module of the crate.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// An argument fell outside the mathematical domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// The adaptive precision ladder reached `max_mantissa_bits` without the
    /// two highest evaluations agreeing to `rel_tol`.
    #[error(
        "precision exhausted: requested accuracy needs more than {max_bits} mantissa bits \
         ({detail}); raise max_mantissa_bits"
    )]
    PrecisionExhausted { max_bits: u32, detail: String },

    /// A root search could not bracket its target.
    #[error("root not bracketed: {0}")]
    Bracket(String),

    /// A requested computation is structurally infeasible (e.g. recovery
    /// order k*s >= m).
    #[error("infeasible: {0}")]
    Infeasible(String),
}

pub type Result<T> = std::result::Result<T, Error>;
