//! Closed-form propagator kernels for the oscillator reservoir.
//!
//! The Hamiltonian (ħ = 1) is
//!
//! ```text
//! H = (ω/2) σ_z + Σ_k ω_k b_k^dag b_k + (ω/2) Σ_k g_k (b_k + b_k^dag) σ_z ,
//! ```
//!
//! optionally extended by a free external mode Ω a^dag a - (Ω/2) σ_z. Since
//! σ_z commutes with everything, the propagator U(t) = exp(-iHt) splits over
//! the sectors s = ±1, where the reservoir sees a displaced oscillator per
//! mode. Between coherent states the sector matrix element is an entire
//! function of the conjugated endpoints, and stripping the Gaussian
//! normalizations leaves the kernel
//!
//! ```text
//! u(ᾱ, α′; t) = exp{ Σ_k ᾱ_k α′_k e^{-iω_k t} } · e^A · e^{-sB} ,
//!
//! φ_k = (ω/2)(g_k/ω_k)(1 - e^{-iω_k t})
//! A   = Σ_k [ i (ω/2)² (g_k²/ω_k) t - (ω/2)² (g_k²/ω_k²)(1 - e^{-iω_k t}) ]
//! B   = Σ_k φ_k (ᾱ_k + α′_k) + i (ω/2) t .
//! ```
//!
//! In the (up, down) basis ordering used throughout the crate the sector
//! block is therefore e^A · diag(e^{-B}, e^{+B}): the e^{+B} entry belongs to
//! spin-down. That orientation is not a free choice — it is the one fixed by
//! first-order-in-t agreement with exp(-iHt), and the dense-oracle comparison
//! enforces it at acceptance tolerance. The driven kernel replaces B by B₂ =
//! Σ_k φ_k(ᾱ_k + α′_k) + i((ω-Ω)/2)t and gains the free-mode prefactor
//! exp{ν̄ ν′ e^{-iΩt}}.

use crate::coherent::CoherentPoint;
use crate::error::QndError;
use crate::mat2::Mat2;
use crate::params::{OscillatorBathSpec, Sector, SystemParams};
use crate::C64;

/// Displacement phase φ_k(t) = (ω/2)(g/ω_k)(1 - e^{-i ω_k t}) for one mode.
///
/// `omega_k` must be strictly positive (enforced by bath validation).
pub fn phi_k(omega: f64, g: f64, omega_k: f64, t: f64) -> C64 {
    let rotation = C64::new(0.0, -omega_k * t).exp();
    (0.5 * omega) * (g / omega_k) * (C64::new(1.0, 0.0) - rotation)
}

/// Endpoint-independent phase A(t), summed over modes.
///
/// Its real part is -Σ_k |φ_k|²/2 ≤ 0, so |e^A| ≤ 1.
pub fn phase_a(omega: f64, bath: &OscillatorBathSpec, t: f64) -> C64 {
    let half_omega_sq = (0.5 * omega) * (0.5 * omega);
    let mut a = C64::new(0.0, 0.0);
    for m in &bath.modes {
        let g2 = m.g * m.g;
        let rotation = C64::new(0.0, -m.omega * t).exp();
        a += C64::new(0.0, half_omega_sq * g2 / m.omega * t);
        a -= half_omega_sq * g2 / (m.omega * m.omega) * (C64::new(1.0, 0.0) - rotation);
    }
    a
}

/// Endpoint-dependent exponent B(t) = Σ_k φ_k (ᾱ_k + α′_k) + i(ω/2)t.
///
/// `alpha_star` holds the values of the conjugated left endpoints; for a
/// physical element ⟨α|U|α′⟩ pass the elementwise conjugate of α.
pub fn exponent_b(
    omega: f64,
    bath: &OscillatorBathSpec,
    t: f64,
    alpha_star: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> Result<C64, QndError> {
    alpha_star.expect_len(bath.len(), "exponent_b alpha_star")?;
    alpha_prime.expect_len(bath.len(), "exponent_b alpha_prime")?;
    let mut b = C64::new(0.0, 0.5 * omega * t);
    for (k, m) in bath.modes.iter().enumerate() {
        b += phi_k(omega, m.g, m.omega, t)
            * (alpha_star.amplitudes[k] + alpha_prime.amplitudes[k]);
    }
    Ok(b)
}

/// Driven-variant exponent B₂(t) = Σ_k φ_k (ᾱ_k + α′_k) + i((ω-Ω)/2)t.
///
/// Only the additive phase term feels the drive: the displacement phases
/// φ_k keep the bare ω, because the reservoir coupling strength (ω/2)g_k
/// does not involve Ω.
pub fn exponent_b2(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
    alpha_star: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> Result<C64, QndError> {
    let drive = sys.require_drive()?;
    alpha_star.expect_len(bath.len(), "exponent_b2 alpha_star")?;
    alpha_prime.expect_len(bath.len(), "exponent_b2 alpha_prime")?;
    let mut b = C64::new(0.0, 0.5 * (sys.omega - drive) * t);
    for (k, m) in bath.modes.iter().enumerate() {
        b += phi_k(sys.omega, m.g, m.omega, t)
            * (alpha_star.amplitudes[k] + alpha_prime.amplitudes[k]);
    }
    Ok(b)
}

/// The three phase ingredients of an oscillator kernel evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorPhases {
    /// Per-mode displacement phases φ_k(t), bath order.
    pub phi: Vec<C64>,
    /// Endpoint-independent phase A(t).
    pub a: C64,
    /// Endpoint-dependent exponent (B for the undriven kernel, B₂ driven).
    pub b: C64,
}

/// Compute φ_k, A, B for the undriven kernel. All vanish at t = 0.
pub fn propagator_phases(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
    alpha_star: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> Result<PropagatorPhases, QndError> {
    sys.validate()?;
    bath.validate()?;
    let phi = bath
        .modes
        .iter()
        .map(|m| phi_k(sys.omega, m.g, m.omega, t))
        .collect();
    let a = phase_a(sys.omega, bath, t);
    let b = exponent_b(sys.omega, bath, t, alpha_star, alpha_prime)?;
    Ok(PropagatorPhases { phi, a, b })
}

/// One evaluated propagator kernel: scalar prefactors plus the diagonal 2×2
/// system-sector block.
#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorKernel {
    /// exp{Σ_k ᾱ_k α′_k e^{-iω_k t}}: free rotation of the reservoir labels.
    pub bath_prefactor: C64,
    /// exp{ν̄ ν′ e^{-iΩt}} for the driven kernel, `None` otherwise.
    pub drive_prefactor: Option<C64>,
    /// Sector entries (up, down) = (e^{A-B}, e^{A+B}), without prefactors.
    pub sector_diag: [C64; 2],
}

impl OscillatorKernel {
    /// Diagonal entry for one sector, without the scalar prefactors.
    pub fn sector_entry(&self, sector: Sector) -> C64 {
        self.sector_diag[sector.index()]
    }

    /// Kernel value for one sector with all prefactors applied.
    pub fn full_element(&self, sector: Sector) -> C64 {
        self.bath_prefactor * self.drive_prefactor.unwrap_or(C64::new(1.0, 0.0))
            * self.sector_entry(sector)
    }

    /// The 2×2 sector block diag(e^{A-B}, e^{A+B}).
    pub fn sector_block(&self) -> Mat2 {
        let mut m = Mat2::zero();
        m.0[0][0] = self.sector_diag[0];
        m.0[1][1] = self.sector_diag[1];
        m
    }

    /// Determinant of the sector block; equals e^{2A} for every endpoint.
    pub fn block_determinant(&self) -> C64 {
        self.sector_diag[0] * self.sector_diag[1]
    }
}

fn bath_prefactor(
    bath: &OscillatorBathSpec,
    t: f64,
    alpha_star: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> C64 {
    let mut exponent = C64::new(0.0, 0.0);
    for (k, m) in bath.modes.iter().enumerate() {
        exponent += alpha_star.amplitudes[k]
            * alpha_prime.amplitudes[k]
            * C64::new(0.0, -m.omega * t).exp();
    }
    exponent.exp()
}

/// Undriven kernel u₁(ᾱ, α′; t) for both sectors at once.
pub fn kernel_u1(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
    alpha_star: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> Result<OscillatorKernel, QndError> {
    let phases = propagator_phases(sys, bath, t, alpha_star, alpha_prime)?;
    Ok(OscillatorKernel {
        bath_prefactor: bath_prefactor(bath, t, alpha_star, alpha_prime),
        drive_prefactor: None,
        sector_diag: [(phases.a - phases.b).exp(), (phases.a + phases.b).exp()],
    })
}

/// Driven kernel u₂(ν̄, ᾱ, ν′, α′; t); requires `sys.drive_omega`.
///
/// At Ω = 0 and ν̄ = ν′ = 0 this reduces exactly to `kernel_u1` with a unit
/// drive prefactor.
pub fn kernel_u2(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
    nu_star: C64,
    nu_prime: C64,
    alpha_star: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> Result<OscillatorKernel, QndError> {
    sys.validate()?;
    bath.validate()?;
    let drive = sys.require_drive()?;
    let a = phase_a(sys.omega, bath, t);
    let b2 = exponent_b2(sys, bath, t, alpha_star, alpha_prime)?;
    let drive_prefactor = (nu_star * nu_prime * C64::new(0.0, -drive * t).exp()).exp();
    Ok(OscillatorKernel {
        bath_prefactor: bath_prefactor(bath, t, alpha_star, alpha_prime),
        drive_prefactor: Some(drive_prefactor),
        sector_diag: [(a - b2).exp(), (a + b2).exp()],
    })
}

/// Physical matrix element ⟨α|U_s(t)|α′⟩ from a kernel evaluation.
///
/// The kernel must have been evaluated at `alpha_star = conj(alpha)`; this
/// multiplies on the Gaussian normalizations exp(-|α|²/2 - |α′|²/2).
pub fn physical_matrix_element(
    kernel: &OscillatorKernel,
    sector: Sector,
    alpha: &CoherentPoint,
    alpha_prime: &CoherentPoint,
) -> C64 {
    kernel.full_element(sector) * (-0.5 * (alpha.norm_sq() + alpha_prime.norm_sq())).exp()
}

/// Physical matrix element for the driven kernel, including the external
/// mode's normalization. The kernel must have been evaluated at
/// `alpha_star = conj(alpha)` and `nu_star = conj(nu)`.
pub fn physical_matrix_element_driven(
    kernel: &OscillatorKernel,
    sector: Sector,
    alpha: &CoherentPoint,
    alpha_prime: &CoherentPoint,
    nu: C64,
    nu_prime: C64,
) -> C64 {
    physical_matrix_element(kernel, sector, alpha, alpha_prime)
        * (-0.5 * (nu.norm_sqr() + nu_prime.norm_sqr())).exp()
}

/// ⟨α|U_s(t)|α′⟩ in one call: kernel at conjugated endpoints + normalization.
pub fn coherent_matrix_element_u1(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
    alpha: &CoherentPoint,
    alpha_prime: &CoherentPoint,
    sector: Sector,
) -> Result<C64, QndError> {
    let kernel = kernel_u1(sys, bath, t, &alpha.conj(), alpha_prime)?;
    Ok(physical_matrix_element(&kernel, sector, alpha, alpha_prime))
}

/// ⟨ν, α|U_s(t)|ν′, α′⟩ for the driven variant.
#[allow(clippy::too_many_arguments)]
pub fn coherent_matrix_element_u2(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
    nu: C64,
    nu_prime: C64,
    alpha: &CoherentPoint,
    alpha_prime: &CoherentPoint,
    sector: Sector,
) -> Result<C64, QndError> {
    let kernel = kernel_u2(sys, bath, t, nu.conj(), nu_prime, &alpha.conj(), alpha_prime)?;
    Ok(physical_matrix_element_driven(
        &kernel, sector, alpha, alpha_prime, nu, nu_prime,
    ))
}

/// Coherence ratio ρ₀₁(t)/ρ₀₁(0) of the reduced system state for a system
/// superposition evolving against the reservoir vacuum:
///
/// ```text
/// ρ01(t)/ρ01(0) = e^{-iωt} exp(-2 Σ_k |φ_k(t)|²) .
/// ```
///
/// The magnitude exp(-2Σ|φ_k|²) is convention-free; the e^{-iωt} phase is
/// the free-system rotation under U = exp(-iHt). Any superposition with
/// nonzero coherence gives the same ratio, since the weights cancel.
pub fn dephasing_factor(
    sys: &SystemParams,
    bath: &OscillatorBathSpec,
    t: f64,
) -> Result<C64, QndError> {
    sys.validate()?;
    bath.validate()?;
    let phi_sq: f64 = bath
        .modes
        .iter()
        .map(|m| phi_k(sys.omega, m.g, m.omega, t).norm_sqr())
        .sum();
    Ok(C64::new(0.0, -sys.omega * t).exp() * (-2.0 * phi_sq).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn pt(vals: &[(f64, f64)]) -> CoherentPoint {
        CoherentPoint::new(vals.iter().map(|&(re, im)| c(re, im)).collect()).unwrap()
    }

    #[test]
    fn phi_vanishes_at_zero_time_and_zero_coupling() {
        assert_eq!(phi_k(1.3, 0.7, 2.0, 0.0), c(0.0, 0.0));
        assert_eq!(phi_k(1.3, 0.0, 2.0, 1.7), c(0.0, 0.0));
    }

    #[test]
    fn phi_at_half_period_is_real_and_doubled() {
        // ω = 2, g = 0.5, ω_k = 1, t = π: (1)(0.5)(1 - e^{-iπ}) = 1.
        let p = phi_k(2.0, 0.5, 1.0, PI);
        assert_abs_diff_eq!(p.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p.im, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn phase_a_vanishes_at_zero_time_and_decoupled() {
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5), (2.0, 0.3)]);
        assert_eq!(phase_a(1.0, &bath, 0.0), c(0.0, 0.0));
        let free = OscillatorBathSpec::from_pairs(&[(1.0, 0.0)]);
        assert_eq!(phase_a(1.0, &free, 2.0), c(0.0, 0.0));
    }

    #[test]
    fn phase_a_single_mode_half_period() {
        // ω = 2, g = 0.5, ω_1 = 1, t = π: A = i(0.25)π - 0.25·2 = -1/2 + iπ/4.
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5)]);
        let a = phase_a(2.0, &bath, PI);
        assert_abs_diff_eq!(a.re, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(a.im, PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn real_part_of_a_is_minus_half_phi_norm() {
        let bath = OscillatorBathSpec::from_pairs(&[(0.9, 0.4), (2.1, -0.6), (3.0, 0.2)]);
        let omega = 1.7;
        for &t in &[0.3, 1.0, 2.9] {
            let a = phase_a(omega, &bath, t);
            let phi_sq: f64 = bath
                .modes
                .iter()
                .map(|m| phi_k(omega, m.g, m.omega, t).norm_sqr())
                .sum();
            assert_abs_diff_eq!(a.re, -0.5 * phi_sq, epsilon = 1e-14);
        }
    }

    #[test]
    fn exponent_b_vacuum_is_free_phase() {
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5)]);
        let v = CoherentPoint::vacuum(1);
        let b = exponent_b(1.0, &bath, 2.0, &v, &v).unwrap();
        assert_abs_diff_eq!(b.re, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(b.im, 1.0, epsilon = 0.0);
    }

    #[test]
    fn exponent_b_decoupled_ignores_endpoints() {
        let bath = OscillatorBathSpec::from_pairs(&[(1.5, 0.0)]);
        let a1 = pt(&[(0.4, -0.2)]);
        let a2 = pt(&[(-1.0, 0.9)]);
        let b = exponent_b(2.0, &bath, 0.7, &a1, &a2).unwrap();
        assert_abs_diff_eq!(b.im, 0.7, epsilon = 1e-15);
        assert_abs_diff_eq!(b.re, 0.0, epsilon = 0.0);
    }

    #[test]
    fn exponent_b2_decoupled_carries_detuned_phase() {
        // g = 0, ω = 3, Ω = 1, t = 1 → i(3-1)/2 = i.
        let sys = SystemParams::driven(3.0, 1.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.0)]);
        let v = CoherentPoint::vacuum(1);
        let b2 = exponent_b2(&sys, &bath, 1.0, &v, &v).unwrap();
        assert_abs_diff_eq!(b2.re, 0.0, epsilon = 0.0);
        assert_abs_diff_eq!(b2.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exponent_b2_keeps_bare_omega_in_displacement_phases() {
        // ω = 2, Ω = 0.5, mode (1, 0.5), t = π: φ(2, 0.5, 1, π) = 1, so
        // B₂ = (ᾱ₁ + α′₁)·1 + i(2 − 0.5)π/2. The drive shifts only the
        // additive phase term, never φ_k.
        let sys = SystemParams::driven(2.0, 0.5);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5)]);
        let a_star = pt(&[(0.3, 0.0)]);
        let a_prime = pt(&[(0.2, -0.1)]);
        let b2 = exponent_b2(&sys, &bath, PI, &a_star, &a_prime).unwrap();
        assert_abs_diff_eq!(b2.re, 0.5, epsilon = 1e-14);
        assert_abs_diff_eq!(b2.im, -0.1 + 0.75 * PI, epsilon = 1e-14);
    }

    #[test]
    fn exponent_b2_resonant_vacuum_vanishes() {
        let sys = SystemParams::driven(2.0, 2.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.3)]);
        let v = CoherentPoint::vacuum(1);
        let b2 = exponent_b2(&sys, &bath, 1.3, &v, &v).unwrap();
        assert_abs_diff_eq!(b2.norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn exponent_b2_requires_drive() {
        let sys = SystemParams::new(1.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.3)]);
        let v = CoherentPoint::vacuum(1);
        assert!(matches!(
            exponent_b2(&sys, &bath, 1.0, &v, &v),
            Err(QndError::MissingDrive)
        ));
    }

    #[test]
    fn all_phases_vanish_at_zero_time() {
        let sys = SystemParams::new(1.3);
        let bath = OscillatorBathSpec::from_pairs(&[(0.8, 0.4), (2.0, -0.3)]);
        let a1 = pt(&[(0.2, 0.1), (-0.4, 0.6)]);
        let a2 = pt(&[(0.9, 0.0), (0.0, -0.5)]);
        let phases = propagator_phases(&sys, &bath, 0.0, &a1, &a2).unwrap();
        assert_eq!(phases.a, c(0.0, 0.0));
        assert_eq!(phases.b, c(0.0, 0.0));
        assert!(phases.phi.iter().all(|p| *p == c(0.0, 0.0)));
    }

    #[test]
    fn kernel_u1_at_zero_time_is_overlap_kernel() {
        let sys = SystemParams::new(1.3);
        let bath = OscillatorBathSpec::from_pairs(&[(0.8, 0.4), (2.0, -0.3)]);
        let a1 = pt(&[(0.2, 0.1), (-0.4, 0.6)]);
        let a2 = pt(&[(0.9, 0.0), (0.0, -0.5)]);
        let kernel = kernel_u1(&sys, &bath, 0.0, &a1, &a2).unwrap();
        let exponent: C64 = a1
            .amplitudes
            .iter()
            .zip(&a2.amplitudes)
            .map(|(x, y)| x * y)
            .sum();
        let expect = exponent.exp();
        assert!((kernel.bath_prefactor - expect).norm() < 1e-15);
        assert_eq!(kernel.sector_entry(Sector::Up), c(1.0, 0.0));
        assert_eq!(kernel.sector_entry(Sector::Down), c(1.0, 0.0));
    }

    #[test]
    fn kernel_u1_decoupled_is_free_two_level_evolution() {
        // Under exp(-iHt), spin-up acquires e^{-iωt/2}: the e^{+B} entry sits
        // in the spin-down slot.
        let sys = SystemParams::new(2.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.0)]);
        let v = CoherentPoint::vacuum(1);
        let t = 0.9;
        let kernel = kernel_u1(&sys, &bath, t, &v, &v).unwrap();
        let up = kernel.sector_entry(Sector::Up);
        let down = kernel.sector_entry(Sector::Down);
        let expect_up = c(0.0, -sys.omega * t / 2.0).exp();
        assert!((up - expect_up).norm() < 1e-15);
        assert!((down - expect_up.conj()).norm() < 1e-15);
    }

    #[test]
    fn block_determinant_is_exp_two_a() {
        let sys = SystemParams::new(1.7);
        let bath = OscillatorBathSpec::from_pairs(&[(0.9, 0.5), (2.2, -0.4)]);
        let a1 = pt(&[(0.3, -0.2), (0.5, 0.1)]);
        let a2 = pt(&[(-0.6, 0.4), (0.2, 0.8)]);
        for &t in &[0.4, 1.1, 2.7] {
            let kernel = kernel_u1(&sys, &bath, t, &a1, &a2).unwrap();
            let det = kernel.block_determinant();
            let expect = (2.0 * phase_a(sys.omega, &bath, t)).exp();
            assert!((det - expect).norm() < 1e-14);
        }
    }

    #[test]
    fn kernel_u2_degenerates_to_u1_without_drive_quanta() {
        let sys_undriven = SystemParams::new(1.4);
        let sys_driven = SystemParams::driven(1.4, 0.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.1, 0.35), (2.4, 0.15)]);
        let a1 = pt(&[(0.2, 0.3), (-0.1, 0.5)]);
        let a2 = pt(&[(0.7, -0.2), (0.0, 0.4)]);
        let t = 1.6;
        let u1 = kernel_u1(&sys_undriven, &bath, t, &a1, &a2).unwrap();
        let u2 = kernel_u2(&sys_driven, &bath, t, c(0.0, 0.0), c(0.0, 0.0), &a1, &a2).unwrap();
        assert_eq!(u2.drive_prefactor, Some(c(1.0, 0.0)));
        assert_eq!(u2.bath_prefactor, u1.bath_prefactor);
        assert_eq!(u2.sector_diag, u1.sector_diag);
    }

    #[test]
    fn kernel_u2_zero_time_collects_both_overlap_exponents() {
        let sys = SystemParams::driven(1.0, 0.7);
        let bath = OscillatorBathSpec::from_pairs(&[(1.2, 0.25)]);
        let a1 = pt(&[(0.4, 0.1)]);
        let a2 = pt(&[(-0.3, 0.6)]);
        let nu_star = c(0.2, -0.5);
        let nu_prime = c(0.8, 0.3);
        let kernel = kernel_u2(&sys, &bath, 0.0, nu_star, nu_prime, &a1, &a2).unwrap();
        let expect = (nu_star * nu_prime).exp();
        assert!((kernel.drive_prefactor.unwrap() - expect).norm() < 1e-15);
        assert_eq!(kernel.sector_diag, [c(1.0, 0.0), c(1.0, 0.0)]);
    }

    #[test]
    fn physical_element_is_unity_at_zero_time_same_point() {
        let sys = SystemParams::new(1.3);
        let bath = OscillatorBathSpec::from_pairs(&[(0.8, 0.4)]);
        let alpha = pt(&[(0.6, -0.3)]);
        for sector in Sector::BOTH {
            let elem = coherent_matrix_element_u1(&sys, &bath, 0.0, &alpha, &alpha, sector).unwrap();
            assert!((elem - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn physical_element_modulus_never_exceeds_one() {
        let sys = SystemParams::new(2.2);
        let bath = OscillatorBathSpec::from_pairs(&[(0.7, 0.45), (1.9, -0.3)]);
        let points = [
            pt(&[(0.0, 0.0), (0.0, 0.0)]),
            pt(&[(0.8, -0.4), (0.3, 0.5)]),
            pt(&[(-1.1, 0.2), (0.0, -0.9)]),
        ];
        for a in &points {
            for b in &points {
                for sector in Sector::BOTH {
                    for &t in &[0.2, 1.4, 2.9] {
                        let elem =
                            coherent_matrix_element_u1(&sys, &bath, t, a, b, sector).unwrap();
                        assert!(elem.norm() <= 1.0 + 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn dephasing_factor_from_phi_magnitudes() {
        let sys = SystemParams::new(1.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.4), (2.3, 0.2)]);
        for &t in &[0.0, 0.5, 1.7] {
            let d = dephasing_factor(&sys, &bath, t).unwrap();
            let phi_sq: f64 = bath
                .modes
                .iter()
                .map(|m| phi_k(sys.omega, m.g, m.omega, t).norm_sqr())
                .sum();
            assert_abs_diff_eq!(d.norm(), (-2.0 * phi_sq).exp(), epsilon = 1e-14);
        }
        let d0 = dephasing_factor(&sys, &bath, 0.0).unwrap();
        assert_eq!(d0, c(1.0, 0.0));
    }

    #[test]
    fn dephasing_revives_at_commensurate_times() {
        // Integer mode frequencies: every φ_k returns to zero at t = 2π.
        let sys = SystemParams::new(0.9);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5), (2.0, 0.3)]);
        let d = dephasing_factor(&sys, &bath, 2.0 * PI).unwrap();
        assert_abs_diff_eq!(d.norm(), 1.0, epsilon = 1e-12);
        let mid = dephasing_factor(&sys, &bath, PI).unwrap();
        assert!(mid.norm() < 1.0);
    }

    #[test]
    fn kernel_rejects_invalid_bath() {
        let sys = SystemParams::new(1.0);
        let bath = OscillatorBathSpec::from_pairs(&[(0.0, 0.5)]);
        let v = CoherentPoint::vacuum(1);
        assert!(kernel_u1(&sys, &bath, 1.0, &v, &v).is_err());
    }

    #[test]
    fn kernel_rejects_endpoint_length_mismatch() {
        let sys = SystemParams::new(1.0);
        let bath = OscillatorBathSpec::from_pairs(&[(1.0, 0.5)]);
        let v1 = CoherentPoint::vacuum(1);
        let v2 = CoherentPoint::vacuum(2);
        assert!(matches!(
            kernel_u1(&sys, &bath, 1.0, &v2, &v1),
            Err(QndError::DimensionMismatch { .. })
        ));
    }
}
