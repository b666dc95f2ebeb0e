use thiserror::Error;

/// Failure modes shared by every computation in the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LabError {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not interior to {domain}")]
    NotInterior { domain: String },

    #[error("point lies within {distance:e} of the boundary of {domain} (margin {margin:e})")]
    DomainMargin { domain: String, distance: f64, margin: f64 },

    #[error("capability not available: {0}")]
    Capability(String),

    #[error("precision loss: {0}")]
    Precision(String),

    #[error("kernel consistency violated: {0}")]
    Consistency(String),

    #[error("division hazard: |K(z,w)| = {0:e} is below 1e-30")]
    DivisionHazard(f64),

    #[error("degenerate evaluation point: {0}")]
    Degenerate(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("boundary point is not strongly pseudoconvex (bordered determinant {0:e} >= 0)")]
    NotStronglyPseudoconvex(f64),

    #[error("quadrature did not converge: {0}")]
    Accuracy(String),

    #[error("holomorphic branch inconsistency: {0}")]
    Branch(String),

    #[error("Gram matrix condition number {condition:e} exceeds 1e12; try degrees {suggested}")]
    IllConditioned { condition: f64, suggested: String },
}

impl LabError {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_argument_error(&self) -> bool {
        matches!(
            self,
            LabError::Argument(_)
                | LabError::DimensionMismatch { .. }
                | LabError::NotInterior { .. }
                | LabError::DomainMargin { .. }
                | LabError::Capability(_)
                | LabError::Precondition(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
