//! Numerical toolkit for the fermionic N-representability problem.

pub mod duality;
pub mod ellipsoid;
pub mod error;
pub mod fock;
pub mod formats;
pub mod hamiltonians;
pub mod linalg;
pub mod oracle;
pub mod rdm;
pub mod verifier;

pub use error::{Error, Result};
