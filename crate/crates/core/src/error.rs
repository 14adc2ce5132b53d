use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Cholesky pivot at `pivot_index` fell below the positive-definiteness threshold.
    #[error("matrix is not positive definite (pivot {pivot_index}); regularize with a larger lambda")]
    NotPositiveDefinite { pivot_index: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("eigensolver did not converge after {iterations} sweeps")]
    NoConvergence { iterations: usize },

    /// The feature vector has (numerically) zero length in the inverse Gram metric.
    #[error("feature vector {row} has zero length in the inverse Gram metric")]
    SingularProjection { row: usize },

    #[error("unknown basis family `{0}`")]
    UnknownFamily(String),

    #[error("unknown target `{0}`")]
    UnknownTarget(String),

    #[error("row {row}: label {label} is neither of the two designated classes")]
    LabelNotInClasses { row: usize, label: f64 },

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("invalid model document: {0}")]
    InvalidModel(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

impl Error {
    /// Numerical failures, as opposed to malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NotPositiveDefinite { .. }
                | Error::NoConvergence { .. }
                | Error::SingularProjection { .. }
        )
    }
}
