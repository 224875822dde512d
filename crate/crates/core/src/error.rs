use thiserror::Error;

/// Errors produced by the analysis library.
///
/// The CLI maps these onto exit codes: `Resource` exits 3, everything
/// else exits 2.
#[derive(Debug, Error)]
pub enum Error {
    /// A value violates a structural precondition (out-of-range state,
    /// mismatched space size, invalid level, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// User-supplied data is malformed or inconsistent.
    #[error("input error: {0}")]
    Input(String),

    /// A distribution's total mass is not exactly 1.
    #[error("normalization error: total mass is {total}, off by {defect}")]
    Normalization { total: String, defect: String },

    /// An atom violates the distribution's declared mode.
    #[error("mode error: {0}")]
    Mode(String),

    /// A computation would exceed the configured size guard.
    #[error("resource guard: {0}")]
    Resource(String),

    /// A seed tuple reaches more than one recurrent class; the caller
    /// must pick one explicitly.
    #[error("ambiguous seed: {} recurrent classes reachable", classes.len())]
    AmbiguousSeed { classes: Vec<Vec<usize>> },

    /// An internal invariant failed (indicates a bug or a misidentified
    /// recurrent class).
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
