use thiserror::Error;

/// Errors produced by state construction, validation and the measures.
#[derive(Debug, Error)]
pub enum NonfreeError {
    #[error("mode count {0} outside supported range 1..={1}")]
    ModeCount(usize, usize),

    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),

    #[error("state mixes particle-number sectors: {0}")]
    NumberSymmetryViolation(String),

    #[error("norm violation: {0}")]
    NormViolation(String),

    #[error("matrix not Hermitian (max asymmetry {0:.3e})")]
    NotHermitian(f64),

    #[error("matrix not positive semidefinite (min eigenvalue {0:.3e})")]
    NotPositive(f64),

    #[error("orbital columns not orthonormal (max Gram deviation {0:.3e})")]
    NotOrthonormal(f64),

    #[error("occupation spectrum leaves [0,1] by {0:.3e}, beyond tolerance")]
    SpectrumBound(f64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate ground level: gap {0:.3e} below resolution")]
    DegenerateGroundState(f64),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

pub type Result<T> = std::result::Result<T, NonfreeError>;
