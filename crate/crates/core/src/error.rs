use thiserror::Error;

use crate::solver::PcgReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not positive definite: pivot {pivot} at row {row}")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error("null space of the right-hand side is not contained in the null space of the left-hand side (residual {residual:.3e})")]
    NullspaceInclusionViolated { residual: f64 },

    #[error("element {element} has a nonpositive Jacobian determinant ({determinant:.3e})")]
    DegenerateElement { element: usize, determinant: f64 },

    #[error("the assembled problem is singular; the Dirichlet boundary does not remove all rigid body modes")]
    InsufficientBoundaryConditions,

    #[error("cannot select corners for subdomains {0} and {1}: face nodes cannot satisfy the pair rule")]
    CornerSelectionFailed(usize, usize),

    #[error("subdomains {0} and {1} do not share a face")]
    NotAdjacent(usize, usize),

    #[error("projection Gram matrix is singular (duplicate constraint rows)")]
    SingularGram,

    #[error("PCG did not converge in {} iterations", .0.iterations)]
    MaxIterationsExceeded(Box<PcgReport>),

    #[error("invalid problem specification: {0}")]
    InvalidSpec(String),

    #[error("{phase} failed: {source}")]
    Phase {
        phase: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn in_phase(self, phase: &'static str) -> Error {
        Error::Phase {
            phase,
            source: Box::new(self),
        }
    }

    /// Innermost error once phase wrappers are removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Phase { source, .. } => source.root(),
            other => other,
        }
    }
}
