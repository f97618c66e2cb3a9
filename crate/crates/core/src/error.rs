use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    /// An oracle or finder refused an input that is too large.
    #[error("{what}: n = {n} exceeds the limit {limit}")]
    ResourceGuard { what: &'static str, n: usize, limit: usize },
    #[error("tree over {n} leaves exceeds the cost table range {n_max}")]
    TableRange { n: usize, n_max: usize },
    #[error("base sequence is not admissible at i = {i}: {reason}")]
    AdmissibilityPrecondition { i: usize, reason: &'static str },
    #[error("derived g is not strictly increasing at (n1, n2) = ({n1}, {n2})")]
    Construction { n1: usize, n2: usize },
    #[error("graph is not generated by an ultrametric: w({x},{y}) < min(w({x},{z}), w({y},{z}))")]
    NotUltrametric { x: usize, y: usize, z: usize },
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("parse error at byte {offset}: {msg}")]
    Parse { offset: usize, msg: String },
    #[error("scripted merge {step} ({a}, {b}) is not among the tied best pairs")]
    ScriptViolation { step: usize, a: usize, b: usize },
    #[error("invalid parameter `{field}`: {msg}")]
    Parameter { field: &'static str, msg: String },
    /// A module invariant failed at runtime. Always a bug.
    #[error("internal invariant breached: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(offset: usize, msg: impl Into<String>) -> Self {
        Error::Parse { offset, msg: msg.into() }
    }
}
