//! Self-adjoint extensions of restricted Laplacians with finite-dimensional
//! boundary spaces: Weyl families, Krein resolvents, parametrization
//! conversions and point spectra.

pub mod error;
pub mod krein;
pub mod models;
pub mod numeric;
pub mod oracle;
pub mod parametrizations;
pub mod sampling;
pub mod serde_util;
pub mod spectral;
pub mod verify;

pub use error::{Error, Result};
