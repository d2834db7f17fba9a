//! Model parameters: system splitting, bath specs, sector labels, tolerances.
//!
//! Everything is in units with ħ = 1. The two-level system couples to its
//! reservoir only through σ_z, so every propagator in this crate decomposes
//! over the σ_z eigenvalue s = ±1 ("sector"); `Sector` is that label. Row 0
//! of any 2×2 system block is the spin-up (s = +1) sector, row 1 spin-down.

use serde::{Deserialize, Serialize};

use crate::error::{ModeViolation, QndError};

/// Two-level system parameters: splitting `omega`, optional external drive
/// frequency `drive_omega` (present only for the driven variant).
/// Hard ceiling on any dense Hilbert-space dimension assembled in this
/// crate (truncated oracles, tensor-product bath propagators).
pub const DIMENSION_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Level splitting ω of the two-level system.
    pub omega: f64,
    /// Frequency Ω of the external oscillator mode, if driven.
    #[serde(default)]
    pub drive_omega: Option<f64>,
}

impl SystemParams {
    pub fn new(omega: f64) -> Self {
        Self { omega, drive_omega: None }
    }

    pub fn driven(omega: f64, drive_omega: f64) -> Self {
        Self { omega, drive_omega: Some(drive_omega) }
    }

    /// Check all fields are finite. Idempotent; kernels call this on entry.
    pub fn validate(&self) -> Result<(), QndError> {
        if !self.omega.is_finite() {
            return Err(QndError::InvalidParameter {
                name: "omega",
                value: self.omega,
                reason: "must be finite",
            });
        }
        if let Some(w) = self.drive_omega {
            if !w.is_finite() {
                return Err(QndError::InvalidParameter {
                    name: "drive_omega",
                    value: w,
                    reason: "must be finite",
                });
            }
        }
        Ok(())
    }

    /// Drive frequency, or an error for undriven systems.
    pub fn require_drive(&self) -> Result<f64, QndError> {
        self.drive_omega.ok_or(QndError::MissingDrive)
    }
}

/// One oscillator reservoir mode: frequency ω_k > 0 and real coupling g_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorMode {
    pub omega: f64,
    pub g: f64,
}

/// Oscillator reservoir: the system couples to each mode through
/// (ω/2) g_k (b_k + b_k^dag) σ_z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillatorBathSpec {
    pub modes: Vec<OscillatorMode>,
}

impl OscillatorBathSpec {
    pub fn new(modes: Vec<OscillatorMode>) -> Self {
        Self { modes }
    }

    /// Build from `(omega_k, g_k)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            modes: pairs.iter().map(|&(omega, g)| OscillatorMode { omega, g }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Every mode frequency must be strictly positive and finite (the phases
    /// divide by ω_k), every coupling finite. Returns all offending modes.
    pub fn validate(&self) -> Result<(), QndError> {
        let mut violations = Vec::new();
        for (index, m) in self.modes.iter().enumerate() {
            if !(m.omega.is_finite() && m.omega > 0.0) {
                violations.push(ModeViolation { index, field: "omega", value: m.omega });
            }
            if !m.g.is_finite() {
                violations.push(ModeViolation { index, field: "g", value: m.g });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(QndError::InvalidBath(violations))
        }
    }
}

/// One spin-reservoir mode: splitting ω_k (any real) and real coupling c_k.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinMode {
    pub omega: f64,
    pub c: f64,
}

/// Spin reservoir: mode k contributes ω_k σ_zk to the free part and couples
/// through (ω/2) c_k σ_xk S_z.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpinBathSpec {
    pub modes: Vec<SpinMode>,
}

impl SpinBathSpec {
    pub fn new(modes: Vec<SpinMode>) -> Self {
        Self { modes }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self {
            modes: pairs.iter().map(|&(omega, c)| SpinMode { omega, c }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    /// Spin-mode splittings may take either sign; everything must be finite.
    pub fn validate(&self) -> Result<(), QndError> {
        let mut violations = Vec::new();
        for (index, m) in self.modes.iter().enumerate() {
            if !m.omega.is_finite() {
                violations.push(ModeViolation { index, field: "omega", value: m.omega });
            }
            if !m.c.is_finite() {
                violations.push(ModeViolation { index, field: "c", value: m.c });
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(QndError::InvalidBath(violations))
        }
    }
}

/// σ_z (or S_z) eigenvalue label: `Up` is s = +1, `Down` is s = -1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    Up,
    Down,
}

impl Sector {
    pub const BOTH: [Sector; 2] = [Sector::Up, Sector::Down];

    /// The eigenvalue s = ±1.
    pub fn sign(self) -> f64 {
        match self {
            Sector::Up => 1.0,
            Sector::Down => -1.0,
        }
    }

    /// Row/column of this sector in 2×2 system blocks (Up = 0, Down = 1).
    pub fn index(self) -> usize {
        match self {
            Sector::Up => 0,
            Sector::Down => 1,
        }
    }

    pub fn from_sign(s: i32) -> Result<Self, QndError> {
        match s {
            1 => Ok(Sector::Up),
            -1 => Ok(Sector::Down),
            _ => Err(QndError::InvalidParameter {
                name: "sector",
                value: s as f64,
                reason: "must be +1 or -1",
            }),
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            Sector::Up => Sector::Down,
            Sector::Down => Sector::Up,
        }
    }
}

/// Numerical control knobs shared across the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Relative agreement target for series tails, truncation adequacy, and
    /// convergence checks.
    #[serde(default = "default_rel_tol")]
    pub rel_tol: f64,
    /// Absolute floor for residuals of quantities that pass through zero.
    #[serde(default = "default_abs_tol")]
    pub abs_tol: f64,
    /// Hard ceiling on the per-mode Fock cutoff the oracle may escalate to.
    #[serde(default = "default_max_fock")]
    pub max_fock: usize,
    /// Hard ceiling on the reservoir-series order.
    #[serde(default = "default_max_dyson_order")]
    pub max_dyson_order: usize,
}

fn default_rel_tol() -> f64 {
    1e-9
}
fn default_abs_tol() -> f64 {
    1e-12
}
fn default_max_fock() -> usize {
    64
}
fn default_max_dyson_order() -> usize {
    10
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            rel_tol: default_rel_tol(),
            abs_tol: default_abs_tol(),
            max_fock: default_max_fock(),
            max_dyson_order: default_max_dyson_order(),
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<(), QndError> {
        if !(self.rel_tol.is_finite() && self.rel_tol > 0.0) {
            return Err(QndError::InvalidParameter {
                name: "rel_tol",
                value: self.rel_tol,
                reason: "must be finite and positive",
            });
        }
        if !(self.abs_tol.is_finite() && self.abs_tol >= 0.0) {
            return Err(QndError::InvalidParameter {
                name: "abs_tol",
                value: self.abs_tol,
                reason: "must be finite and non-negative",
            });
        }
        if self.max_fock < 2 {
            return Err(QndError::InvalidParameter {
                name: "max_fock",
                value: self.max_fock as f64,
                reason: "must be at least 2",
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_signs_and_indices() {
        assert_eq!(Sector::Up.sign(), 1.0);
        assert_eq!(Sector::Down.sign(), -1.0);
        assert_eq!(Sector::Up.index(), 0);
        assert_eq!(Sector::Down.index(), 1);
        assert_eq!(Sector::from_sign(1).unwrap(), Sector::Up);
        assert_eq!(Sector::from_sign(-1).unwrap(), Sector::Down);
        assert!(Sector::from_sign(0).is_err());
        assert_eq!(Sector::Up.flipped(), Sector::Down);
    }

    #[test]
    fn oscillator_bath_rejects_nonpositive_frequency() {
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5), (-2.0, 0.1), (0.0, 0.3)]);
        let err = bath.validate().unwrap_err();
        match err {
            QndError::InvalidBath(v) => {
                assert_eq!(v.len(), 2);
                assert_eq!(v[0].index, 1);
                assert_eq!(v[1].index, 2);
                assert_eq!(v[0].field, "omega");
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn oscillator_bath_rejects_nonfinite_coupling() {
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, f64::NAN)]);
        assert!(bath.validate().is_err());
    }

    #[test]
    fn spin_bath_allows_negative_splitting() {
        let bath = SpinBathSpec::from_pairs(&[(-1.5, 0.3)]);
        assert!(bath.validate().is_ok());
    }

    #[test]
    fn validation_is_idempotent() {
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5)]);
        assert!(bath.validate().is_ok());
        assert!(bath.validate().is_ok());
        let sys = SystemParams::driven(1.0, 0.5);
        assert!(sys.validate().is_ok());
        assert!(sys.validate().is_ok());
    }

    #[test]
    fn drive_requirement() {
        assert!(SystemParams::new(1.0).require_drive().is_err());
        assert_eq!(SystemParams::driven(1.0, 2.0).require_drive().unwrap(), 2.0);
    }

    #[test]
    fn tolerances_defaults_and_validation() {
        let t = Tolerances::default();
        assert_eq!(t.rel_tol, 1e-9);
        assert_eq!(t.abs_tol, 1e-12);
        assert_eq!(t.max_fock, 64);
        assert_eq!(t.max_dyson_order, 10);
        assert!(t.validate().is_ok());
        let bad = Tolerances { rel_tol: 0.0, ..t };
        assert!(bad.validate().is_err());
    }
}
