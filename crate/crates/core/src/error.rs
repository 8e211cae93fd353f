use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("degenerate element {element}: jacobian determinant {det:.3e} at gauss point {point}")]
    DegenerateElement { element: usize, point: usize, det: f64 },

    /// A pivot of a factorization that should be definite fell below threshold.
    #[error("matrix is not positive definite: pivot {pivot:.3e} at row {row} (diagonal {diagonal:.3e})")]
    NotPositiveDefinite { row: usize, pivot: f64, diagonal: f64 },

    #[error("null space is not spanned by the supplied rigid body modes: {0}")]
    InconsistentNullSpace(String),

    #[error("interior block is singular: {0}")]
    SingularInterior(Box<Error>),

    #[error("coarse problem is singular: {0}")]
    SingularCoarse(String),

    #[error("matrix is not symmetric (max asymmetry {0:.3e})")]
    NotSymmetric(f64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("unknown {kind} `{name}` (available: {available})")]
    UnknownStrategy {
        kind: &'static str,
        name: String,
        available: String,
    },

    #[error("dense operation on {size} unknowns exceeds the limit of {limit}")]
    TooLarge { size: usize, limit: usize },

    #[error("subdomain {index}: {source}")]
    Subdomain {
        index: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub(crate) fn in_subdomain(self, index: usize) -> Self {
        Error::Subdomain {
            index,
            source: Box::new(self),
        }
    }
}
