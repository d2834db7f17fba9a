//! Canonical-transformation structure of the propagators: the oscillator
//! kernel's sector block is a (generally complex) squeeze diag(e^{−B}, e^{B})
//! times the scalar e^A, and the spin kernel's series terms are shaped like
//! x-axis rotations e^{iθσ_x} (n even) or σ_z times one (n odd).
//!
//! This module holds the phase-space squeeze map, the rotation matrices and
//! their Pauli-vector conjugation images, polar factorization of real 2×2
//! unit-determinant matrices, and a report generator that checks the
//! structural identities on actual kernel evaluations.
//!
//! The squeeze exponent B is complex in general. The phase-space map is
//! implemented for real B (a genuine squeeze); the complex case is treated
//! in the report as a squeeze of magnitude Re B composed with a phase
//! rotation Im B, which is exactly the polar split of diag(e^{−B}, e^{B}).

use serde::Serialize;

use crate::coherent::CoherentPoint;
use crate::error::QndError;
use crate::mat2::Mat2;
use crate::oscillator::{kernel_u1, propagator_phases};
use crate::params::{OscillatorBathSpec, Sector, SpinBathSpec, SystemParams};
use crate::spin::{coupling_rate, dyson_term, DEFAULT_QUADRATURE_ORDER};
use crate::C64;

/// A point (x, p) of the single-mode phase plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PhasePoint {
    pub x: f64,
    pub p: f64,
}

/// The area-preserving squeeze (x, p) ↦ (e^B x, e^{−B} p) for real B.
/// Its Jacobian determinant is e^B · e^{−B} = 1 identically.
pub fn squeeze_map(b_real: f64, point: PhasePoint) -> PhasePoint {
    PhasePoint {
        x: b_real.exp() * point.x,
        p: (-b_real).exp() * point.p,
    }
}

/// Real 2×2 matrix with its determinant cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwoByTwoReal {
    pub entries: [[f64; 2]; 2],
    pub det: f64,
}

impl TwoByTwoReal {
    pub fn new(entries: [[f64; 2]; 2]) -> Self {
        let det = entries[0][0] * entries[1][1] - entries[0][1] * entries[1][0];
        Self { entries, det }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn transpose(&self) -> Self {
        let e = &self.entries;
        Self::new([[e[0][0], e[1][0]], [e[0][1], e[1][1]]])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Self::new(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                dev = dev.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        dev
    }

    /// Cached-determinant invariant: the cache must match a recomputation.
    pub fn validate(&self, abs_tol: f64) -> Result<(), QndError> {
        let fresh = self.entries[0][0] * self.entries[1][1]
            - self.entries[0][1] * self.entries[1][0];
        if (fresh - self.det).abs() > abs_tol {
            return Err(QndError::InvalidParameter {
                name: "det",
                value: self.det,
                reason: "cached determinant disagrees with entries",
            });
        }
        Ok(())
    }
}

/// Real 3×3 matrix with its determinant cached at construction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeByThreeReal {
    pub entries: [[f64; 3]; 3],
    pub det: f64,
}

fn det3(e: &[[f64; 3]; 3]) -> f64 {
    e[0][0] * (e[1][1] * e[2][2] - e[1][2] * e[2][1])
        - e[0][1] * (e[1][0] * e[2][2] - e[1][2] * e[2][0])
        + e[0][2] * (e[1][0] * e[2][1] - e[1][1] * e[2][0])
}

impl ThreeByThreeReal {
    pub fn new(entries: [[f64; 3]; 3]) -> Self {
        let det = det3(&entries);
        Self { entries, det }
    }

    pub fn identity() -> Self {
        Self::new([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    pub fn matmul(&self, rhs: &Self) -> Self {
        let a = &self.entries;
        let b = &rhs.entries;
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| a[i][k] * b[k][j]).sum();
            }
        }
        Self::new(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut dev = 0.0f64;
        for i in 0..3 {
            for j in 0..3 {
                dev = dev.max((self.entries[i][j] - other.entries[i][j]).abs());
            }
        }
        dev
    }

    pub fn scale(&self, factor: f64) -> Self {
        let mut out = self.entries;
        for row in &mut out {
            for v in row.iter_mut() {
                *v *= factor;
            }
        }
        Self::new(out)
    }

    pub fn validate(&self, abs_tol: f64) -> Result<(), QndError> {
        if (det3(&self.entries) - self.det).abs() > abs_tol {
            return Err(QndError::InvalidParameter {
                name: "det",
                value: self.det,
                reason: "cached determinant disagrees with entries",
            });
        }
        Ok(())
    }
}

/// Parity of a series order n, selecting which rotation shape applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Self {
        if n % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// The rotation matrix R(θ): even parity gives e^{iθσ_x} =
/// [[cos θ, i sin θ], [i sin θ, cos θ]]; odd parity multiplies by σ_z.
pub fn rotation_matrix_r(theta: f64, parity: Parity) -> Mat2 {
    let even = Mat2::new(
        C64::new(theta.cos(), 0.0),
        C64::new(0.0, theta.sin()),
        C64::new(0.0, theta.sin()),
        C64::new(theta.cos(), 0.0),
    );
    match parity {
        Parity::Even => even,
        Parity::Odd => Mat2::sigma_z() * even,
    }
}

/// Image of the Pauli vector under conjugation by e^{iθσ_x}: row j holds the
/// expansion of e^{iθσ_x} σ_j e^{−iθσ_x} in the (σ_x, σ_y, σ_z) basis — a
/// proper rotation about the x-axis by 2θ.
pub fn pauli_conjugation_even(theta: f64) -> ThreeByThreeReal {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    ThreeByThreeReal::new([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])
}

/// A 3×3 conjugation image carrying an explicit scalar prefactor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PrefactoredConjugation {
    pub prefactor: f64,
    pub matrix: ThreeByThreeReal,
}

impl PrefactoredConjugation {
    /// The prefactor folded into the entries.
    pub fn total(&self) -> ThreeByThreeReal {
        self.matrix.scale(self.prefactor)
    }

    /// Determinant of the full transformation (prefactor included).
    pub fn total_determinant(&self) -> f64 {
        self.prefactor.powi(3) * self.matrix.det
    }
}

/// Image of the Pauli vector under conjugation by σ_z e^{iθσ_x}, written as
/// the scalar e^{iπ} = −1 times [[1,0,0],[0,cos 2θ,sin 2θ],[0,sin 2θ,−cos 2θ]].
/// The total determinant is (−1)³ · (−1) = 1: still a proper rotation.
pub fn pauli_conjugation_odd(theta: f64) -> PrefactoredConjugation {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    PrefactoredConjugation {
        prefactor: -1.0,
        matrix: ThreeByThreeReal::new([[1.0, 0.0, 0.0], [0.0, c, s], [0.0, s, -c]]),
    }
}

/// The proper-rotation 2×2 block of [`pauli_conjugation_even`]: rotation of
/// the (σ_y, σ_z) plane by 2θ. Satisfies blockᵀ = block(−θ).
pub fn rotation_block(theta: f64) -> TwoByTwoReal {
    let (c, s) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    TwoByTwoReal::new([[c, -s], [s, c]])
}

/// Polar factorization m = rotation · positive of a real 2×2 matrix with
/// determinant 1, via the closed-form symmetric square root of mᵀm.
///
/// Returns (rotation, positive): rotation orthogonal with determinant 1,
/// positive symmetric positive-definite with determinant 1.
pub fn polar_factorize_symplectic(
    m: &TwoByTwoReal,
    abs_tol: f64,
) -> Result<(TwoByTwoReal, TwoByTwoReal), QndError> {
    m.validate(abs_tol)?;
    if (m.det - 1.0).abs() > abs_tol {
        return Err(QndError::NotUnitDeterminant {
            det: m.det,
            tol: abs_tol,
        });
    }
    // S = mᵀm is symmetric positive definite with det 1; its square root is
    // (S + I)/√(tr S + 2), an identity special to 2×2 unit-determinant S.
    let s = m.transpose().matmul(m);
    let denom = (s.entries[0][0] + s.entries[1][1] + 2.0).sqrt();
    let positive = TwoByTwoReal::new([
        [
            (s.entries[0][0] + 1.0) / denom,
            s.entries[0][1] / denom,
        ],
        [
            s.entries[1][0] / denom,
            (s.entries[1][1] + 1.0) / denom,
        ],
    ]);
    // positive has determinant 1, so its inverse is the adjugate.
    let inv = TwoByTwoReal::new([
        [positive.entries[1][1], -positive.entries[0][1]],
        [-positive.entries[1][0], positive.entries[0][0]],
    ]);
    let rotation = m.matmul(&inv);
    Ok((rotation, positive))
}

/// One verified structural claim.
#[derive(Debug, Clone, Serialize)]
pub struct StructureCheck {
    pub claim: String,
    pub residual: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

/// Everything the oscillator-side structure checks need.
#[derive(Debug, Clone, Copy)]
pub struct OscillatorStructureInput<'a> {
    pub sys: &'a SystemParams,
    pub bath: &'a OscillatorBathSpec,
    pub t: f64,
    pub alpha_star: &'a CoherentPoint,
    pub alpha_prime: &'a CoherentPoint,
}

/// Everything the spin-side structure checks need. Series terms up to
/// `max_order` are decomposed per mode.
#[derive(Debug, Clone, Copy)]
pub struct SpinStructureInput<'a> {
    pub sys: &'a SystemParams,
    pub bath: &'a SpinBathSpec,
    pub sector: Sector,
    pub t: f64,
    pub max_order: usize,
}

/// Structural verdicts on actual kernel evaluations, JSON-serializable.
#[derive(Debug, Clone, Serialize)]
pub struct StructureReport {
    pub checks: Vec<StructureCheck>,
    /// Squeeze exponent (Re B, Im B) extracted from the oscillator kernel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub squeeze_exponent: Option<[f64; 2]>,
    /// Scalar exponent (Re A, Im A) of the oscillator kernel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scalar_exponent: Option<[f64; 2]>,
    /// Per-mode zeroth-order rotation angles λ_k t of the spin kernel.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spin_theta: Option<Vec<f64>>,
    pub pass: bool,
}

fn push_check(
    checks: &mut Vec<StructureCheck>,
    claim: &str,
    residual: f64,
    tolerance: f64,
    detail: Option<String>,
) {
    checks.push(StructureCheck {
        claim: claim.to_string(),
        residual,
        tolerance,
        pass: residual < tolerance,
        detail,
    });
}

/// How far a 2×2 complex matrix is from the even rotation shape
/// [[a, b], [b, a]].
pub fn even_shape_residual(m: &Mat2) -> f64 {
    (m.0[0][0] - m.0[1][1]).norm().max((m.0[0][1] - m.0[1][0]).norm())
}

/// How far a 2×2 complex matrix is from σ_z · (even shape), i.e.
/// [[a, b], [−b, −a]].
pub fn odd_shape_residual(m: &Mat2) -> f64 {
    (m.0[0][0] + m.0[1][1]).norm().max((m.0[0][1] + m.0[1][0]).norm())
}

/// Check the squeezing/rotation structure of kernel evaluations and report
/// residuals per claim. Either input may be omitted; a mismatch is reported
/// as a failing check (with the offending matrix), never as an error.
pub fn kernel_structure_report(
    oscillator: Option<&OscillatorStructureInput<'_>>,
    spin: Option<&SpinStructureInput<'_>>,
    abs_tol: f64,
) -> Result<StructureReport, QndError> {
    let mut checks = Vec::new();
    let mut squeeze_exponent = None;
    let mut scalar_exponent = None;
    let mut spin_theta = None;

    if let Some(input) = oscillator {
        let phases = propagator_phases(
            input.sys,
            input.bath,
            input.t,
            input.alpha_star,
            input.alpha_prime,
        )?;
        let kernel = kernel_u1(
            input.sys,
            input.bath,
            input.t,
            input.alpha_star,
            input.alpha_prime,
        )?;
        squeeze_exponent = Some([phases.b.re, phases.b.im]);
        scalar_exponent = Some([phases.a.re, phases.a.im]);

        // Sector block is e^A · diag(e^{−B}, e^{B}), spin-up entry first.
        let expected = Mat2::new(
            (phases.a - phases.b).exp(),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            (phases.a + phases.b).exp(),
        );
        let block = kernel.sector_block();
        push_check(
            &mut checks,
            "sector_block_is_scaled_squeeze",
            block.max_abs_diff(&expected),
            abs_tol,
            None,
        );

        let det_residual = (block.det() - (2.0 * phases.a).exp()).norm();
        push_check(
            &mut checks,
            "sector_determinant_equals_exp_2a",
            det_residual,
            abs_tol,
            None,
        );

        let phi_sum: f64 = phases.phi.iter().map(|p| p.norm_sqr()).sum();
        push_check(
            &mut checks,
            "re_a_equals_minus_half_phi_norm",
            (phases.a.re + 0.5 * phi_sum).abs(),
            abs_tol,
            None,
        );

        // Polar split of the squeeze: diag(e^{−B}, e^{B}) equals the phase
        // rotation diag(e^{−i Im B}, e^{i Im B}) times the positive squeeze
        // diag(e^{−Re B}, e^{Re B}).
        let ea = phases.a.exp();
        let phase = [
            C64::new(0.0, -phases.b.im).exp(),
            C64::new(0.0, phases.b.im).exp(),
        ];
        let stretch = [(-phases.b.re).exp(), phases.b.re.exp()];
        let split_residual = (0..2).fold(0.0f64, |acc, j| {
            acc.max((block.0[j][j] / ea - phase[j] * stretch[j]).norm())
        });
        push_check(
            &mut checks,
            "squeeze_polar_split",
            split_residual,
            abs_tol,
            None,
        );

        // The real-B squeeze map preserves phase-space area.
        let mapped = squeeze_map(phases.b.re, PhasePoint { x: 1.0, p: 1.0 });
        push_check(
            &mut checks,
            "squeeze_map_jacobian_unity",
            (mapped.x * mapped.p - 1.0).abs(),
            abs_tol,
            None,
        );
    }

    if let Some(input) = spin {
        let mut thetas = Vec::with_capacity(input.bath.len());
        let mut zeroth_residual = 0.0f64;
        let mut even_residual = 0.0f64;
        let mut odd_residual = 0.0f64;
        let mut worst: Option<(usize, usize, Mat2)> = None;
        for (k, mode) in input.bath.modes.iter().enumerate() {
            let theta = coupling_rate(input.sys, mode.c, input.sector) * input.t;
            thetas.push(theta);
            for n in 0..=input.max_order {
                let term = dyson_term(
                    input.sys,
                    mode,
                    input.sector,
                    input.t,
                    n,
                    DEFAULT_QUADRATURE_ORDER,
                )?;
                let shape_residual = match Parity::of(n) {
                    Parity::Even => {
                        let r = even_shape_residual(&term.value);
                        even_residual = even_residual.max(r);
                        r
                    }
                    Parity::Odd => {
                        // σ_z · (odd term) must be even-shaped: the odd terms
                        // are σ_z times an even-shaped matrix.
                        let r = odd_shape_residual(&term.value);
                        odd_residual = odd_residual.max(r);
                        r
                    }
                };
                if shape_residual >= abs_tol && worst.is_none() {
                    worst = Some((k, n, term.value));
                }
                if n == 0 {
                    let rotation = rotation_matrix_r(theta, Parity::Even);
                    zeroth_residual =
                        zeroth_residual.max(term.value.max_abs_diff(&rotation));
                }
            }
        }
        let detail = worst.map(|(k, n, m)| {
            format!("mode {k}, order {n}: {:?}", m.0)
        });
        push_check(
            &mut checks,
            "spin_zeroth_term_is_coupling_rotation",
            zeroth_residual,
            abs_tol,
            None,
        );
        push_check(
            &mut checks,
            "spin_even_terms_rotation_shaped",
            even_residual,
            abs_tol,
            detail.clone(),
        );
        push_check(
            &mut checks,
            "spin_odd_terms_are_sigma_z_times_even",
            odd_residual,
            abs_tol,
            detail,
        );
        spin_theta = Some(thetas);
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(StructureReport {
        checks,
        squeeze_exponent,
        scalar_exponent,
        spin_theta,
        pass,
    })
}
