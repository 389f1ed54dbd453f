use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("critical process (lambda == mu): sigma^2 is undefined")]
    CriticalProcess,

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid observation series: {0}")]
    InvalidSeries(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypergeometric series cannot be evaluated to working accuracy")]
    OverflowGuard,

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("observation intervals are not equidistant (interval {found} vs {expected})")]
    NotEquidistant { expected: f64, found: f64 },

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("no sign change of the estimating equation after {0} bracket expansions")]
    NoRoot(usize),

    #[error("solver did not converge after {0} iterations")]
    NonConvergence(usize),

    #[error("saddlepoint equation could not be solved for an interval")]
    InnerSolveFailure,

    #[error("quadrature tolerance not reached on [{a}, {b}]")]
    QuadratureFailure { a: f64, b: f64 },

    #[error("parameter iterate left its bounds at component {0}")]
    OutOfBounds(usize),

    #[error("requested time {requested} lies beyond the simulated horizon {horizon}")]
    ScheduleBeyondTrajectory { requested: f64, horizon: f64 },

    #[error("value {0} is outside the transformable range")]
    OutOfRange(f64),

    #[error("no converged fits for group {0}")]
    EmptyGroup(String),

    #[error("undefined: {0}")]
    Undefined(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.kind() {
            csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
            _ => Error::Parse(e.to_string()),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
