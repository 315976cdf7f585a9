use num_complex::Complex64;
use thiserror::Error;

use crate::numeric::NumericError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Numeric(#[from] NumericError),
    #[error("spectral parameter {z} lies in (or within the guard radius of) the spectrum of the reference operator")]
    Excluded { z: Complex64 },
    #[error("extension-singular: Gamma_(Pi,Theta)({z}) is not invertible (sigma_min {sigma_min:.3e})")]
    ExtensionSingular { z: Complex64, sigma_min: f64 },
    #[error("invalid extension parameters: {0}")]
    InvalidParams(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("boundary pair violates {failed:?}")]
    PairConditions { failed: Vec<&'static str> },
    #[error("internal consistency violation: {0}")]
    Internal(String),
    #[error("vector is not in the numerical kernel (residual {residual:.3e})")]
    NotInKernel { residual: f64 },
    #[error("invalid window: {0}")]
    InvalidWindow(String),
    #[error("invalid vertex gluing: {0}")]
    InvalidGluing(String),
    #[error("unsearchable window: {0}")]
    Unsearchable(String),
}

impl Error {
    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Numeric(NumericError::Singular { .. }) => "numeric_singular",
            Error::Numeric(_) => "numeric",
            Error::Excluded { .. } => "excluded_point",
            Error::ExtensionSingular { .. } => "extension_singular",
            Error::InvalidParams(_) => "invalid_params",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::GridTooCoarse(_) => "grid_too_coarse",
            Error::Unsupported(_) => "unsupported",
            Error::InvalidModel(_) => "invalid_model",
            Error::PairConditions { .. } => "pair_conditions",
            Error::Internal(_) => "internal",
            Error::NotInKernel { .. } => "not_in_kernel",
            Error::InvalidWindow(_) => "invalid_window",
            Error::InvalidGluing(_) => "invalid_gluing",
            Error::Unsearchable(_) => "unsearchable_window",
        }
    }
}
