use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("time {tau} is outside the spline domain [{start}, {end}]")]
    OutOfDomain { tau: f64, start: f64, end: f64 },

    /// The reduced Hessian lost positive definiteness during elimination.
    #[error("insufficiently pinned problem: elimination failed at segment {segment}")]
    InsufficientlyPinned { segment: usize },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("degenerate workspace: {0}")]
    DegenerateWorkspace(String),

    #[error("dimension `{name}`: {source}")]
    Dimension {
        name: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::InsufficientlyPinned { .. } | Error::NumericalFailure(_) => true,
            Error::Dimension { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
