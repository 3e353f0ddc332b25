use thiserror::Error;

/// Errors raised anywhere in the analysis pipeline.
///
/// Validation problems (bad input) and numerical failures are kept apart so
/// the CLI can map them onto distinct exit codes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown identifier '{name}' at position {pos}")]
    UnknownIdentifier { pos: usize, name: String },

    #[error("piecewise intervals [{a_lo}, {a_hi}) and [{b_lo}, {b_hi}) overlap")]
    PiecewiseOverlap {
        a_lo: f64,
        a_hi: f64,
        b_lo: f64,
        b_hi: f64,
    },

    #[error("domain error at x = {x}: {msg}")]
    Domain { x: f64, msg: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("invalid input at {path}: {msg}")]
    Validation { path: String, msg: String },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn domain(x: f64, msg: impl Into<String>) -> Self {
        Error::Domain { x, msg: msg.into() }
    }

    pub fn validation(path: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Validation {
            path: path.into(),
            msg: msg.into(),
        }
    }

    /// True for failures caused by the input rather than by the numerics.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
