use thiserror::Error;

/// Which of the two downdating rotations of a lattice step lost positive
/// definiteness.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DowndateStage {
    /// Removal of the first-row vector `u`.
    FirstRow,
    /// Removal of the last-row vector `z̄`.
    LastRow,
    /// A standalone downdate outside the lattice.
    Standalone,
}

impl std::fmt::Display for DowndateStage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DowndateStage::FirstRow => f.write_str("u-downdate"),
            DowndateStage::LastRow => f.write_str("zbar-downdate"),
            DowndateStage::Standalone => f.write_str("downdate"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("first column and first row disagree at the corner: {col} vs {row}")]
    MismatchedCorner { col: f64, row: f64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("non-finite input value")]
    NonFiniteInput,

    #[error("zero pivot: {0}")]
    ZeroPivot(&'static str),

    #[error("downdate breakdown at row {row} ({stage}): matrix is not numerically positive definite")]
    DowndateBreakdown { row: usize, stage: DowndateStage },

    #[error("rotation kind mismatch: expected {expected}")]
    KindMismatch { expected: &'static str },

    #[error("singular triangular factor: zero diagonal at index {index}")]
    SingularTriangular { index: usize },

    #[error("matrix is not positive definite: pivot {index} is not positive")]
    NotPositiveDefinite { index: usize },

    #[error("matrix is rank deficient: column {column} has no pivot")]
    RankDeficient { column: usize },

    #[error("invalid option: {0}")]
    InvalidOption(String),
}

impl Error {
    /// True for failures caused by floating point breakdown, as opposed to
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::ZeroPivot(_)
                | Error::DowndateBreakdown { .. }
                | Error::SingularTriangular { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::RankDeficient { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
