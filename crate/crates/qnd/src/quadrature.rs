//! Gauss–Legendre quadrature on [0, 1] and iterated simplex integration.
//!
//! The reservoir-series terms need integrals over the ordered simplex
//! 0 ≤ τ_1 ≤ ... ≤ τ_n ≤ t of products Π_j exp(c_j τ_j). These are evaluated
//! as iterated one-dimensional rules: every level shares one fixed node set,
//! the inner levels apply an indefinite-integration matrix (exact for the
//! degree-(q-1) interpolant through the nodes), and the outermost level is an
//! ordinary weighted sum. Cost is n·q² evaluations rather than qⁿ.

use crate::error::QndError;
use crate::C64;

/// Gauss–Legendre rule mapped to [0, 1].
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadRule {
    /// q-point Gauss–Legendre rule on [0, 1]; exact for polynomials of
    /// degree ≤ 2q - 1.
    pub fn gauss_legendre(order: usize) -> Result<Self, QndError> {
        if order == 0 {
            return Err(QndError::InvalidParameter {
                name: "quadrature order",
                value: 0.0,
                reason: "must be at least 1",
            });
        }
        let q = order;
        let mut nodes = vec![0.0f64; q];
        let mut weights = vec![0.0f64; q];
        // Newton iteration on P_q over [-1, 1]; roots come in ± pairs, so
        // only the lower half is solved and the rest mirrored.
        for i in 0..(q + 1) / 2 {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(q, x);
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            // Derivative at the converged root feeds the weight formula.
            let (_, dp) = legendre_with_derivative(q, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // x is the (q-1-i)-th node in ascending order on [-1, 1].
            nodes[q - 1 - i] = x;
            weights[q - 1 - i] = w;
            nodes[i] = -x;
            weights[i] = w;
        }
        // Map [-1, 1] -> [0, 1].
        for i in 0..q {
            nodes[i] = 0.5 * (nodes[i] + 1.0);
            weights[i] *= 0.5;
        }
        Ok(Self { nodes, weights })
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// ∫_0^1 f, from samples of `f` at the nodes.
    pub fn integrate<F: Fn(f64) -> C64>(&self, f: F) -> C64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| f(x) * w)
            .sum()
    }
}

/// P_q(x) and P_q'(x) by the three-term recurrence.
fn legendre_with_derivative(q: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0; // P_0
    let mut p = x; // P_1
    if q == 0 {
        return (1.0, 0.0);
    }
    for k in 1..q {
        let p_next = ((2 * k + 1) as f64 * x * p - k as f64 * p_prev) / (k + 1) as f64;
        p_prev = p;
        p = p_next;
    }
    let d = q as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, d)
}

/// Indefinite-integration matrix for a node set on [0, 1]:
/// `S[i][j] = ∫_0^{x_i} ℓ_j(u) du` with ℓ_j the Lagrange basis through the
/// nodes. Applying S to samples of f gives ∫_0^{x_i} of the interpolant,
/// exactly for polynomials of degree ≤ q - 1.
pub fn indefinite_matrix(rule: &QuadRule) -> Vec<Vec<f64>> {
    let q = rule.order();
    let x = &rule.nodes;
    // Barycentric weights.
    let mut bary = vec![1.0f64; q];
    for j in 0..q {
        for m in 0..q {
            if m != j {
                bary[j] /= x[j] - x[m];
            }
        }
    }
    let ell = |j: usize, y: f64| -> f64 {
        // Direct product form; fine at these orders and never evaluated at
        // a node of its own grid in the scaled inner rule below.
        let mut num = 1.0;
        for m in 0..q {
            if m != j {
                num *= y - x[m];
            }
        }
        num * bary[j]
    };
    let mut s = vec![vec![0.0f64; q]; q];
    for i in 0..q {
        // ∫_0^{x_i} ℓ_j = x_i Σ_m w_m ℓ_j(x_i x_m); the inner rule is exact
        // since deg ℓ_j = q - 1 ≤ 2q - 1.
        for m in 0..q {
            let y = x[i] * x[m];
            let w = x[i] * rule.weights[m];
            for j in 0..q {
                s[i][j] += w * ell(j, y);
            }
        }
    }
    s
}

/// Nested exponential integral over the ordered simplex:
///
/// ```text
/// ∫_0^t dτ_n e^{c_n τ_n} ∫_0^{τ_n} dτ_{n-1} e^{c_{n-1} τ_{n-1}} ... ∫_0^{τ_2} dτ_1 e^{c_1 τ_1}
/// ```
///
/// `rates` lists c_1 (innermost) through c_n; the empty list gives 1.
pub fn nested_exponential_integral(
    rates: &[C64],
    t: f64,
    rule: &QuadRule,
    indefinite: &[Vec<f64>],
) -> C64 {
    let n = rates.len();
    if n == 0 {
        return C64::new(1.0, 0.0);
    }
    let q = rule.order();
    let taus: Vec<f64> = rule.nodes.iter().map(|&x| x * t).collect();
    // F_0 ≡ 1; F_j(x_i t) = ∫_0^{x_i t} e^{c_j τ} F_{j-1}(τ) dτ.
    let mut f_prev = vec![C64::new(1.0, 0.0); q];
    for &c in &rates[..n - 1] {
        let g: Vec<C64> = taus
            .iter()
            .zip(&f_prev)
            .map(|(&tau, &fp)| (c * tau).exp() * fp)
            .collect();
        let mut f_next = vec![C64::new(0.0, 0.0); q];
        for i in 0..q {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..q {
                acc += indefinite[i][j] * g[j];
            }
            f_next[i] = acc * t;
        }
        f_prev = f_next;
    }
    // Outermost level: plain weighted sum over [0, t].
    let c_n = rates[n - 1];
    let mut total = C64::new(0.0, 0.0);
    for j in 0..q {
        total += rule.weights[j] * (c_n * taus[j]).exp() * f_prev[j];
    }
    total * t
}
