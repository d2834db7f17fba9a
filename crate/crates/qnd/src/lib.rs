//! Analytic propagators for qubit–reservoir dephasing models.

pub mod coherent;
pub mod eigh;
pub mod error;
pub mod mat2;
pub mod oracle;
pub mod oscillator;
pub mod params;
pub mod quadrature;
pub mod spin;
pub mod structure;
pub mod tensor;
pub mod verify;

pub use error::QndError;

/// Shorthand for the complex scalar type used throughout.
pub type C64 = num_complex::Complex64;
