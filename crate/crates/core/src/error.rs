use thiserror::Error;

/// Errors raised by the lattice, geometry and stochastic layers.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),

    #[error("field length {found} does not match expected {expected} for {kind}")]
    LengthMismatch {
        kind: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("field kind mismatch: {left} vs {right}")]
    KindMismatch {
        left: &'static str,
        right: &'static str,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("lattice has {sites} sites; dense matrices are limited to {limit}")]
    TooLarge { sites: usize, limit: usize },

    #[error("orbit metric is singular: {0}")]
    SingularOrbitMetric(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("oracle limited to {limit} degrees of freedom, got {dof}")]
    TooManyDof { dof: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
