use thiserror::Error;

/// Errors shared by every module in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {found}: only 2x2 and 4x4 operators exist in a two-qubit model")]
    UnsupportedDimension { found: usize },

    #[error("entry count {found} does not match a {dim}x{dim} matrix")]
    EntryCount { dim: usize, found: usize },

    #[error("dimension mismatch: {left}x{left} vs {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("kronecker product dimension {0} exceeds the two-qubit limit of 4")]
    KronOverflow(usize),

    #[error("operator is not Hermitian: max asymmetry {max_asymmetry:.3e}")]
    NotHermitian { max_asymmetry: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    EigNotConverged { sweeps: usize, off_norm: f64 },

    #[error("invalid model parameters: {0}")]
    InvalidParams(String),

    #[error("not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("rotation axis is not unit length: |n| = {0}")]
    AxisNotUnit(f64),

    #[error("optimal rotation angle is undefined: both response coefficients vanish")]
    DegenerateAngle,

    #[error("product-state extraction requires b > alpha (got b = {b}, alpha = {alpha})")]
    GroundStateNotProduct { b: f64, alpha: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
