use thiserror::Error;

/// Errors raised anywhere in the pipeline, from parsing an integrand to
/// synthesizing a schedule.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("`{name}` takes {expected} argument(s), got {got} (byte {offset})")]
    Arity {
        name: String,
        expected: usize,
        got: usize,
        offset: usize,
    },

    #[error("evaluation error at byte {offset}: {msg}")]
    Eval { offset: usize, msg: String },

    #[error("evaluation failed at x=({x1}, {x2}): {source}")]
    EvalAt {
        x1: f64,
        x2: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("grid has no interior cells")]
    EmptyDomain,

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("infeasible: {0}")]
    Infeasible(String),

    #[error("unbounded linear program")]
    Unbounded,

    #[error("no convergence after {iterations} iterations (last objective {last_objective})")]
    NoConvergence { iterations: usize, last_objective: f64 },

    #[error("curve extraction failed: {0}")]
    Extraction(String),

    #[error("trajectory did not close within {steps} steps")]
    NonClosing { steps: usize },

    #[error("steering failed: {0}")]
    Steering(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("value out of range: {0}")]
    OutOfRange(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn at(self, x: [f64; 2]) -> Error {
        Error::EvalAt {
            x1: x[0],
            x2: x[1],
            source: Box::new(self),
        }
    }
}
