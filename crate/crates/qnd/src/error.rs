//! Shared error type for parameter validation, truncation, and convergence failures.

use thiserror::Error;

/// A single offending bath mode found during validation.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeViolation {
    /// Index of the mode in the bath spec.
    pub index: usize,
    /// Name of the offending field.
    pub field: &'static str,
    /// The value that failed validation.
    pub value: f64,
}

impl std::fmt::Display for ModeViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "mode {}: {} = {}", self.index, self.field, self.value)
    }
}

#[derive(Debug, Error)]
pub enum QndError {
    /// Bath spec rejected; lists every offending mode.
    #[error("invalid bath spec: {}", format_violations(.0))]
    InvalidBath(Vec<ModeViolation>),

    /// A scalar parameter is out of domain (non-finite, wrong sign, ...).
    #[error("invalid parameter {name}: {value} ({reason})")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    /// An operation requiring the drive was called on an undriven system.
    #[error("system has no external drive configured")]
    MissingDrive,

    /// Vector or matrix dimensions do not line up.
    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// Tensor-space dimension would exceed the configured cap.
    #[error("tensor dimension {dim} exceeds cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    /// Fock truncation left too much population in the top levels.
    #[error(
        "Fock truncation inadequate: top-level population {population:.3e} \
         at n_max = {n_max} exceeds {required:.3e}"
    )]
    TruncationInadequate {
        population: f64,
        n_max: usize,
        required: f64,
    },

    /// A series failed to reach its tail-bound target at the order cap.
    #[error(
        "series tail bound {achieved:.3e} at order {order} does not meet {required:.3e}"
    )]
    Convergence {
        achieved: f64,
        required: f64,
        order: usize,
    },

    /// An operator expected to be Hermitian was not.
    #[error("matrix is not Hermitian: max |H - H^dag| = {deviation:.3e}")]
    NonHermitian { deviation: f64 },

    /// A 2x2 input expected to have unit determinant did not.
    #[error("matrix determinant {det} is not 1 to within {tol}")]
    NotUnitDeterminant { det: f64, tol: f64 },

    /// Linear-algebra backend failure (eigendecomposition etc.).
    #[error("linear algebra backend error: {0}")]
    Linalg(String),
}

fn format_violations(v: &[ModeViolation]) -> String {
    v.iter()
        .map(|m| m.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
