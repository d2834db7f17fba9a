//! Series propagator for the spin reservoir.
//!
//! The Hamiltonian (ħ = 1) is
//!
//! ```text
//! H = (ω/2) S_z + Σ_k ω_k σ_z^{(k)} + (ω/2) Σ_k c_k σ_x^{(k)} S_z ,
//! ```
//!
//! with S_z the system spin and one Pauli triple per reservoir spin. The
//! reservoir term carries no factor 1/2 — ω_k multiplies σ_z as written (see
//! docs/CONVENTIONS.md). In the system sector s = ±1 each reservoir spin
//! evolves independently under the 2×2 generator
//!
//! ```text
//! h_k = ω_k σ_z + λ_k σ_x ,    λ_k = (ω/2) c_k s ,
//! ```
//!
//! and the propagator is expanded in powers of the spin splitting ω_k: the
//! n-th term is (iω_k)ⁿ times an n-dimensional time-simplex integral of a
//! rotation-like matrix whose angle Θ = λ_k A_n alternates through the
//! ordered times,
//!
//! ```text
//! A_n(τ, t) = Σ_{j=1..n} (−1)^{j+1} 2τ_j + (−1)ⁿ t .
//! ```
//!
//! Because A_n is an affine function of the τ_j, the integrand factorizes
//! into per-level exponentials e^{±2iλτ_j} and the simplex integral reduces
//! to the iterated quadrature in [`crate::quadrature`]. The whole series
//! resums to exp(+it·h_k), which is implemented directly as
//! [`exact_mode_propagator`] and used as an internal cross-check. The
//! literal series carries the `+` sign; the conjugate convention
//! exp(−it·h_k) is available behind [`SignConvention`].

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::QndError;
use crate::mat2::Mat2;
use crate::params::{Sector, SpinBathSpec, SpinMode, SystemParams, Tolerances, DIMENSION_CAP};
use crate::quadrature::{indefinite_matrix, nested_exponential_integral, QuadRule};
use crate::tensor;
use crate::C64;

/// Per-level Gauss–Legendre order used by the series entry points. Exact for
/// the polynomial integrands of low-order terms and accurate to near machine
/// precision while the per-step phase 2|λ|Δt stays below ~8 — the
/// subdivision rule in [`mode_propagator`] keeps it there.
pub const DEFAULT_QUADRATURE_ORDER: usize = 32;

/// Safety valve for the time-subdivision search.
const MAX_SUBDIVISIONS: usize = 1 << 16;

/// Overall sign of the exponent in the spin-sector propagators.
///
/// `Plus` is exp(+it·h) per mode with the system phase e^{+i(ω/2)st}; it is
/// the convention the literal (iω_k)ⁿ series sums to, verified term-by-term
/// at orders 0 and 1, and is the shipped default. `Minus` is exp(−it·h),
/// the entrywise complex conjugate (h is real symmetric), with system phase
/// e^{−i(ω/2)st}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SignConvention {
    #[default]
    Plus,
    Minus,
}

/// Coupling rotation rate λ = (ω/2)·c_k·s for one reservoir spin in sector s.
pub fn coupling_rate(sys: &SystemParams, c_k: f64, sector: Sector) -> f64 {
    0.5 * sys.omega * c_k * sector.sign()
}

/// Alternating time sum A_n(τ, t) = Σ_j (−1)^{j+1} 2τ_j + (−1)ⁿ t over an
/// ordered simplex point 0 ≤ τ₁ ≤ … ≤ τ_n ≤ t.
pub fn a_n(taus: &[f64], t: f64) -> Result<f64, QndError> {
    let mut prev = 0.0;
    for &tau in taus {
        if !tau.is_finite() || tau < prev {
            return Err(QndError::InvalidParameter {
                name: "taus",
                value: tau,
                reason: "must be finite and ordered ascending from 0",
            });
        }
        prev = tau;
    }
    if prev > t {
        return Err(QndError::InvalidParameter {
            name: "taus",
            value: prev,
            reason: "must not exceed the outer time",
        });
    }
    let n = taus.len();
    let mut acc = if n % 2 == 0 { t } else { -t };
    for (j, &tau) in taus.iter().enumerate() {
        // j is zero-based; the sum alternates +, −, +, … from τ₁.
        acc += if j % 2 == 0 { 2.0 * tau } else { -2.0 * tau };
    }
    Ok(acc)
}

/// Rotation angle Θ = λ·A_n = (ω/2)·s·c_k·A_n.
pub fn theta(sys: &SystemParams, c_k: f64, sector: Sector, a_n_value: f64) -> f64 {
    coupling_rate(sys, c_k, sector) * a_n_value
}

/// One term of the per-mode series: order and (iω_k)ⁿ-weighted matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DysonTerm {
    pub order: usize,
    pub value: Mat2,
}

/// Truncation tail Σ_{m>order} x^m/m! for x = |ω_k t|; an upper bound on the
/// entrywise modulus of everything the series drops after `order`.
///
/// Sixty explicit terms plus a geometric closure of the remainder; returns
/// +∞ when the closure ratio is not yet < 1 (x far beyond the summed range),
/// which simply drives the caller to subdivide or fail.
pub fn factorial_tail(x: f64, order: usize) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return 0.0;
    }
    let mut term = 1.0f64;
    for m in 1..=order + 1 {
        term *= x / m as f64;
    }
    let mut sum = term;
    let mut m = order + 1;
    for _ in 0..59 {
        m += 1;
        term *= x / m as f64;
        sum += term;
    }
    let r = x / (m + 1) as f64;
    if r < 1.0 {
        sum + term * r / (1.0 - r)
    } else {
        f64::INFINITY
    }
}

/// Smallest order whose tail bound beats `rel_tol`, with the bound itself.
fn choose_order(x: f64, rel_tol: f64, max_order: usize) -> Option<(usize, f64)> {
    (0..=max_order).find_map(|n| {
        let tail = factorial_tail(x, n);
        (tail < rel_tol).then_some((n, tail))
    })
}

/// n-th series term for one mode in one sector.
///
/// The integrand's angle is Θ = λ·A_n; writing e^{iΘ} = e^{iλ(−1)ⁿt} ·
/// Π_j e^{2iλ(−1)^{j+1}τ_j} turns the simplex integrals of cos Θ and sin Θ
/// into the real and imaginary parts of one nested exponential integral E,
/// and the term is (iω_k)ⁿ [[Re E, i Im E], [(−1)ⁿ i Im E, (−1)ⁿ Re E]].
pub fn dyson_term(
    sys: &SystemParams,
    mode: &SpinMode,
    sector: Sector,
    t: f64,
    n: usize,
    quadrature_order: usize,
) -> Result<DysonTerm, QndError> {
    sys.validate()?;
    validate_mode(mode)?;
    let rule = QuadRule::gauss_legendre(quadrature_order)?;
    let indefinite = indefinite_matrix(&rule);
    let lambda = coupling_rate(sys, mode.c, sector);
    Ok(DysonTerm {
        order: n,
        value: dyson_term_core(lambda, mode.omega, t, n, &rule, &indefinite),
    })
}

/// Partial sum Σ_{n=0..=order} of the series terms at a fixed quadrature
/// order; the building block for convergence studies.
pub fn dyson_partial_sum(
    sys: &SystemParams,
    mode: &SpinMode,
    sector: Sector,
    t: f64,
    order: usize,
    quadrature_order: usize,
) -> Result<Mat2, QndError> {
    sys.validate()?;
    validate_mode(mode)?;
    let rule = QuadRule::gauss_legendre(quadrature_order)?;
    let indefinite = indefinite_matrix(&rule);
    let lambda = coupling_rate(sys, mode.c, sector);
    let mut sum = Mat2::zero();
    for n in 0..=order {
        sum = sum + dyson_term_core(lambda, mode.omega, t, n, &rule, &indefinite);
    }
    Ok(sum)
}

fn validate_mode(mode: &SpinMode) -> Result<(), QndError> {
    SpinBathSpec::new(vec![*mode]).validate()
}

fn dyson_term_core(
    lambda: f64,
    omega_k: f64,
    t: f64,
    n: usize,
    rule: &QuadRule,
    indefinite: &[Vec<f64>],
) -> Mat2 {
    let rates: Vec<C64> = (0..n)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            C64::new(0.0, 2.0 * lambda * sign)
        })
        .collect();
    let nested = nested_exponential_integral(&rates, t, rule, indefinite);
    let endpoint_sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let e = C64::new(0.0, lambda * endpoint_sign * t).exp() * nested;
    // E = ∫ e^{iΘ} over the simplex: cos and sin integrals in one pass.
    let cos_int = C64::new(e.re, 0.0);
    let sin_int = C64::new(0.0, e.im);
    let prefactor = C64::new(0.0, omega_k).powu(n as u32);
    let parity = if n % 2 == 0 { 1.0 } else { -1.0 };
    let diag = prefactor * cos_int;
    let off = prefactor * sin_int;
    Mat2::new(diag, off, parity * off, parity * diag)
}

/// A summed (and possibly composed) per-mode propagator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePropagator {
    pub matrix: Mat2,
    /// Series order used per step.
    pub order_used: usize,
    /// Rigorous bound on the entrywise truncation error of `matrix`.
    pub tail_bound: f64,
    /// Number of equal time steps composed (1 = no subdivision).
    pub subdivisions: usize,
}

/// Literal series Σ_{n=0..N} for one mode: N is the smallest order whose
/// factorial tail beats `tol.rel_tol`, capped at `tol.max_dyson_order`.
///
/// This is the raw object: no time subdivision, so it fails with a
/// convergence error once |ω_k t| outruns the order cap, and its quadrature
/// degrades for per-call phases 2|λ t| beyond ~8. [`mode_propagator`] wraps
/// it with the subdivision that keeps both regimes safe.
pub fn mode_propagator_series(
    sys: &SystemParams,
    mode: &SpinMode,
    sector: Sector,
    t: f64,
    tol: &Tolerances,
) -> Result<ModePropagator, QndError> {
    mode_propagator_series_with_order(sys, mode, sector, t, tol, DEFAULT_QUADRATURE_ORDER)
}

/// [`mode_propagator_series`] with an explicit quadrature order, for
/// refinement studies.
pub fn mode_propagator_series_with_order(
    sys: &SystemParams,
    mode: &SpinMode,
    sector: Sector,
    t: f64,
    tol: &Tolerances,
    quadrature_order: usize,
) -> Result<ModePropagator, QndError> {
    sys.validate()?;
    validate_mode(mode)?;
    tol.validate()?;
    let x = (mode.omega * t).abs();
    let (order, tail) = choose_order(x, tol.rel_tol, tol.max_dyson_order).ok_or({
        QndError::Convergence {
            achieved: factorial_tail(x, tol.max_dyson_order),
            required: tol.rel_tol,
            order: tol.max_dyson_order,
        }
    })?;
    let rule = QuadRule::gauss_legendre(quadrature_order)?;
    let indefinite = indefinite_matrix(&rule);
    let lambda = coupling_rate(sys, mode.c, sector);
    let mut sum = Mat2::zero();
    for n in 0..=order {
        sum = sum + dyson_term_core(lambda, mode.omega, t, n, &rule, &indefinite);
    }
    Ok(ModePropagator {
        matrix: sum,
        order_used: order,
        tail_bound: tail,
        subdivisions: 1,
    })
}

/// Per-mode propagator over an arbitrary time span.
///
/// The sector generator is time-independent, so U(t) = U(t/m)^m exactly; m
/// is chosen as the smallest step count for which the series reaches a
/// per-step tail below rel_tol/m within the order cap, with a floor keeping
/// the per-step quadrature phase 2|λ|Δt ≤ 8. The reported `tail_bound` is
/// the composed bound (1 + per-step tail)^m − 1.
pub fn mode_propagator(
    sys: &SystemParams,
    mode: &SpinMode,
    sector: Sector,
    t: f64,
    tol: &Tolerances,
) -> Result<ModePropagator, QndError> {
    sys.validate()?;
    validate_mode(mode)?;
    tol.validate()?;
    let lambda = coupling_rate(sys, mode.c, sector);
    let x = (mode.omega * t).abs();
    let oscillation_floor = ((lambda * t).abs() / 4.0).ceil() as usize;
    let mut m = oscillation_floor.max(1);
    let (m, order, step_tail) = loop {
        let per_step_tol = tol.rel_tol / m as f64;
        if let Some((order, tail)) = choose_order(x / m as f64, per_step_tol, tol.max_dyson_order)
        {
            break (m, order, tail);
        }
        if m >= MAX_SUBDIVISIONS {
            return Err(QndError::Convergence {
                achieved: factorial_tail(x / m as f64, tol.max_dyson_order),
                required: tol.rel_tol / m as f64,
                order: tol.max_dyson_order,
            });
        }
        m += 1;
    };
    let rule = QuadRule::gauss_legendre(DEFAULT_QUADRATURE_ORDER)?;
    let indefinite = indefinite_matrix(&rule);
    let step_t = t / m as f64;
    let mut step = Mat2::zero();
    for n in 0..=order {
        step = step + dyson_term_core(lambda, mode.omega, step_t, n, &rule, &indefinite);
    }
    Ok(ModePropagator {
        matrix: step.pow(m),
        order_used: order,
        tail_bound: (1.0 + step_tail).powi(m as i32) - 1.0,
        subdivisions: m,
    })
}

/// Closed-form resummation of the per-mode series:
///
/// ```text
/// exp(±it(ω_k σ_z + λ σ_x)) = cos(rt) I ± i sin(rt)(ω_k σ_z + λ σ_x)/r ,
/// r = √(ω_k² + λ²) ,
/// ```
///
/// with the r → 0 limit the identity. Sign per `convention`.
pub fn exact_mode_propagator(
    omega_k: f64,
    lambda: f64,
    t: f64,
    convention: SignConvention,
) -> Mat2 {
    let r = omega_k.hypot(lambda);
    if r == 0.0 {
        return Mat2::identity();
    }
    let sign = match convention {
        SignConvention::Plus => 1.0,
        SignConvention::Minus => -1.0,
    };
    let cos = C64::new((r * t).cos(), 0.0);
    let sin_over_r = C64::new(0.0, sign * (r * t).sin() / r);
    Mat2::new(
        cos + sin_over_r * omega_k,
        sin_over_r * lambda,
        sin_over_r * lambda,
        cos - sin_over_r * omega_k,
    )
}

/// Evaluated spin-sector propagator: a scalar system phase and one 2×2
/// matrix per reservoir spin, whose tensor product (mode 0 slowest) is the
/// full bath propagator in the sector.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinKernel {
    pub sector: Sector,
    /// e^{±i(ω/2)st}, sign per convention.
    pub system_phase: C64,
    /// Per-mode propagators, bath order.
    pub per_mode: Vec<Mat2>,
    /// Largest per-step series order used across modes.
    pub order_used: usize,
    /// Largest composed truncation bound across modes; every per-mode matrix
    /// is unitary to within a small multiple of it.
    pub tail_bound: f64,
}

impl SpinKernel {
    /// Tensor product of the per-mode matrices, mode 0 slowest (dim 2^M).
    pub fn full_bath_propagator(&self) -> Result<Array2<C64>, QndError> {
        let factors: Vec<Array2<C64>> = self.per_mode.iter().map(Mat2::to_array).collect();
        tensor::kron_all(&factors, DIMENSION_CAP)
    }

    /// System phase times the full bath propagator: the whole sector-s
    /// propagator on the reservoir Hilbert space.
    pub fn full_propagator(&self) -> Result<Array2<C64>, QndError> {
        Ok(self.full_bath_propagator()?.mapv(|v| v * self.system_phase))
    }
}

/// Propagator for the spin-reservoir model in sector s, as a system phase
/// plus per-mode factors. Uses the subdividing [`mode_propagator`] per mode,
/// so large |ω_k t| and strong couplings are handled transparently.
pub fn kernel_u3(
    sys: &SystemParams,
    bath: &SpinBathSpec,
    sector: Sector,
    t: f64,
    tol: &Tolerances,
    convention: SignConvention,
) -> Result<SpinKernel, QndError> {
    sys.validate()?;
    bath.validate()?;
    tol.validate()?;
    let mut per_mode = Vec::with_capacity(bath.len());
    let mut order_used = 0;
    let mut tail_bound = 0.0f64;
    for mode in &bath.modes {
        let p = mode_propagator(sys, mode, sector, t, tol)?;
        order_used = order_used.max(p.order_used);
        tail_bound = tail_bound.max(p.tail_bound);
        per_mode.push(match convention {
            SignConvention::Plus => p.matrix,
            SignConvention::Minus => p.matrix.conj(),
        });
    }
    let phase_arg = 0.5 * sys.omega * sector.sign() * t;
    let system_phase = match convention {
        SignConvention::Plus => C64::new(0.0, phase_arg).exp(),
        SignConvention::Minus => C64::new(0.0, -phase_arg).exp(),
    };
    Ok(SpinKernel {
        sector,
        system_phase,
        per_mode,
        order_used,
        tail_bound,
    })
}
