//! Coherent-state endpoints and their overlaps.
//!
//! Multimode propagator kernels are evaluated between products of coherent
//! states, one amplitude per reservoir mode. A kernel is the matrix element
//! with the Gaussian normalization exp(-|α|²/2) of each endpoint stripped
//! off, which makes it an entire function of the conjugated left amplitudes;
//! `coherent_overlap` supplies the normalized inner product itself.

use crate::error::QndError;
use crate::C64;

/// A point in the multimode coherent-state label space: one complex
/// amplitude per reservoir mode, in bath-spec order.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentPoint {
    pub amplitudes: Vec<C64>,
}

impl CoherentPoint {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, QndError> {
        for a in &amplitudes {
            if !(a.re.is_finite() && a.im.is_finite()) {
                return Err(QndError::InvalidParameter {
                    name: "coherent amplitude",
                    value: if a.re.is_finite() { a.im } else { a.re },
                    reason: "must be finite",
                });
            }
        }
        Ok(Self { amplitudes })
    }

    /// All-modes-vacuum point (every amplitude zero).
    pub fn vacuum(modes: usize) -> Self {
        Self { amplitudes: vec![C64::new(0.0, 0.0); modes] }
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    /// Σ_k |α_k|².
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Elementwise complex conjugate.
    pub fn conj(&self) -> Self {
        Self { amplitudes: self.amplitudes.iter().map(|a| a.conj()).collect() }
    }

    pub fn expect_len(&self, expected: usize, context: &'static str) -> Result<(), QndError> {
        if self.len() == expected {
            Ok(())
        } else {
            Err(QndError::DimensionMismatch { context, expected, actual: self.len() })
        }
    }
}

/// Normalized overlap ⟨α′|α⟩ of two multimode coherent states:
///
/// ```text
/// <a'|a> = exp( Σ_k [ -|α′_k|²/2 - |α_k|²/2 + conj(α′_k) α_k ] )
/// ```
///
/// Its modulus never exceeds one, and conjugate symmetry
/// ⟨α′|α⟩ = ⟨α|α′⟩* holds exactly.
pub fn coherent_overlap(alpha_prime: &CoherentPoint, alpha: &CoherentPoint) -> Result<C64, QndError> {
    alpha.expect_len(alpha_prime.len(), "coherent_overlap")?;
    let mut exponent = C64::new(0.0, 0.0);
    for (ap, a) in alpha_prime.amplitudes.iter().zip(&alpha.amplitudes) {
        exponent += ap.conj() * a - 0.5 * (ap.norm_sqr() + a.norm_sqr());
    }
    Ok(exponent.exp())
}
