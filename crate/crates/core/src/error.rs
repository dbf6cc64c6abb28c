use thiserror::Error;

/// Errors raised anywhere in the verification pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },

    #[error("unknown name `{0}`")]
    UnknownName(String),

    #[error("domain error in {op}: argument {arg}")]
    Domain { op: &'static str, arg: f64 },

    #[error("point does not assign `{0}`")]
    Unassigned(String),

    #[error("singular matrix (pivot {pivot:e})")]
    Singular { pivot: f64 },

    #[error("gauge violation: {0}")]
    Gauge(String),

    #[error("flow left the domain at u = {u}: {msg}")]
    DomainExit { u: f64, msg: String },

    #[error("step size underflow at u = {u}")]
    StepUnderflow { u: f64 },

    #[error("sampling gave up after {attempts} attempts for point {index}")]
    SamplingExhausted { index: usize, attempts: usize },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("unknown catalog entry `{0}`")]
    UnknownEntry(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Errors that justify drawing a fresh sample point instead of failing.
    pub fn is_domain(&self) -> bool {
        matches!(self, Error::Domain { .. } | Error::Singular { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
