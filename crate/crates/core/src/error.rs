use thiserror::Error;

use crate::bessel::BesselError;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("grid mismatch: operands live on different grids")]
    GridMismatch,
    #[error("support of family member {member} does not fit: {reason}")]
    SupportOverflow { member: usize, reason: String },
    #[error(transparent)]
    Bessel(#[from] BesselError),
    #[error("singular matching system at lambda = {0}")]
    SingularMatching(f64),
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
    #[error("extrapolation did not converge: {0}")]
    Extrapolation(String),
    #[error("eigensolver: {0}")]
    Eigen(String),
}

pub type Result<T> = std::result::Result<T, Error>;
