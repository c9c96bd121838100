use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Broad failure class, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Data,
    Numeric,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },

    #[error("empty dataset")]
    EmptyDataset,

    #[error("non-finite value at row {row}, column {col}")]
    NonFinite { row: usize, col: usize },

    #[error("invalid hyperparameter: {0}")]
    InvalidHyperparameter(String),

    #[error("matrix is not symmetric (max asymmetry {0:e})")]
    NotSymmetric(f64),

    #[error("matrix is not positive definite, even after diagonal jitter")]
    SingularMatrix,

    #[error("degenerate labels: {0}")]
    DegenerateLabels(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("empty neighborhood")]
    EmptyNeighborhood,

    #[error("empty partition")]
    EmptyPartition,

    #[error("mixture component {0} collapsed (weight below 1e-12)")]
    DegenerateComponent(usize),

    #[error("{solver} did not converge after {iterations} iterations")]
    ConvergenceFailure {
        solver: &'static str,
        iterations: usize,
        /// Parameters at the last iterate, in the solver's own layout.
        last_iterate: Vec<f64>,
    },

    #[error("{task}: {source}")]
    InTask { task: String, source: Box<Error> },
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::InvalidHyperparameter(_) => ErrorClass::Config,
            Error::Dimension { .. }
            | Error::EmptyDataset
            | Error::NonFinite { .. }
            | Error::NotSymmetric(_)
            | Error::DegenerateLabels(_)
            | Error::DegenerateInput(_)
            | Error::EmptyNeighborhood
            | Error::EmptyPartition => ErrorClass::Data,
            Error::SingularMatrix
            | Error::DegenerateComponent(_)
            | Error::ConvergenceFailure { .. } => ErrorClass::Numeric,
            Error::InTask { source, .. } => source.class(),
        }
    }

    /// Tags an error with the sub-task that produced it.
    pub fn in_task(self, task: impl Into<String>) -> Self {
        Error::InTask {
            task: task.into(),
            source: Box::new(self),
        }
    }

    pub(crate) fn hyper(msg: impl Into<String>) -> Self {
        Error::InvalidHyperparameter(msg.into())
    }
}

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::Dimension { expected, found })
    }
}
