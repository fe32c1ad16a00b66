use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// Input carries NaN/Inf entries or is otherwise malformed.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Shapes that must agree do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// Out-of-range or inconsistent options.
    #[error("configuration error: {0}")]
    Config(String),

    /// A memory or word-count guard was exceeded.
    #[error("resource guard exceeded: {0}")]
    ResourceLimit(String),

    /// A rank or convergence decision could not be made reliably.
    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    /// No finite dual pencil is available for the requested structure.
    #[error("unsupported dual: {0}")]
    UnsupportedDual(String),

    /// An inverted subexpression vanishes at the zero tuple.
    #[error("not admissible at the origin: inv applied to `{subtree}`, which evaluates to {value:e} at 0")]
    NotAdmissibleAtOrigin { subtree: String, value: f64 },

    /// Evaluation point lies outside the realization's domain.
    #[error("outside domain: pencil is singular (sigma_min = {sigma_min:e})")]
    OutsideDomain { sigma_min: f64 },

    /// Expression text does not match the grammar.
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    /// Every optimizer restart failed to produce a finite objective.
    #[error("optimization failed: {0}")]
    OptimizationFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
