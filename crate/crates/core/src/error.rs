//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated a precondition (negative scale, lag out of range, ...).
    #[error("invalid parameter: {0}")]
    Parameter(String),

    /// Vector/matrix dimensions do not line up.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// The design matrix is rank deficient (condition estimate above the
    /// screening limit). `columns` names the columns that collapsed.
    #[error("singular design (condition estimate {cond:.3e}); offending columns: {}", columns.join(", "))]
    SingularDesign { columns: Vec<String>, cond: f64 },

    /// A correlation is undefined or numerically meaningless (zero-variance
    /// input, or |r| at the Fisher-transform overflow guard).
    #[error("degenerate correlation: {0}")]
    DegenerateCorrelation(String),

    /// The response is constant, so the requested statistic is undefined.
    #[error("constant response: {0}")]
    ConstantResponse(String),

    /// An instance exceeds the limits of the exact enumeration solver.
    #[error("instance too large for exact enumeration: {0}")]
    SizeLimit(String),

    /// The bootstrap redraw budget was exhausted.
    #[error("bootstrap degeneracy: {0}")]
    BootstrapDegenerate(String),

    /// The supply/demand slope configuration admits no equilibrium.
    #[error("unsolvable equilibrium: {0}")]
    UnsolvableEquilibrium(String),

    /// A Monte Carlo replication failed; the index is attached for re-running
    /// that replication in isolation.
    #[error("replication {rep} failed: {source}")]
    Replication {
        rep: usize,
        #[source]
        source: Box<Error>,
    },

    /// File could not be read.
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    /// The input file does not match the requested columns/types.
    #[error("schema error: {0}")]
    Schema(String),

    /// Too few usable rows survived filtering.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

impl Error {
    /// Wraps an error with the index of the failing replication.
    pub fn in_replication(self, rep: usize) -> Error {
        Error::Replication {
            rep,
            source: Box::new(self),
        }
    }
}
