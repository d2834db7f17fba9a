//! Kronecker products and partial traces over labeled tensor factors.
//!
//! Factor 0 is always the slowest index: `kron(a, b)` maps basis pair
//! (i_a, i_b) to row i_a·dim(b) + i_b. Every multi-factor routine in the
//! crate (bath tensor products, the dense oracle, reduced density matrices)
//! uses this row-major convention.

use ndarray::{Array1, Array2};

use crate::error::QndError;
use crate::C64;

/// Kronecker product of two square matrices, `a` slowest.
pub fn kron(a: &Array2<C64>, b: &Array2<C64>) -> Array2<C64> {
    let (ra, ca) = a.dim();
    let (rb, cb) = b.dim();
    let mut out = Array2::zeros((ra * rb, ca * cb));
    for ia in 0..ra {
        for ja in 0..ca {
            let f = a[(ia, ja)];
            for ib in 0..rb {
                for jb in 0..cb {
                    out[(ia * rb + ib, ja * cb + jb)] = f * b[(ib, jb)];
                }
            }
        }
    }
    out
}

/// Kronecker product of a list of square factors, first factor slowest.
/// The empty list gives the 1×1 identity. Errors once the running dimension
/// would exceed `cap`.
pub fn kron_all(factors: &[Array2<C64>], cap: usize) -> Result<Array2<C64>, QndError> {
    let mut out = Array2::from_elem((1, 1), C64::new(1.0, 0.0));
    for f in factors {
        let dim = out.nrows() * f.nrows();
        if dim > cap {
            return Err(QndError::DimensionCap { dim, cap });
        }
        out = kron(&out, f);
    }
    Ok(out)
}

/// Kronecker product of two vectors, `a` slowest.
pub fn kron_vec(a: &Array1<C64>, b: &Array1<C64>) -> Array1<C64> {
    let mut out = Array1::zeros(a.len() * b.len());
    for ia in 0..a.len() {
        for ib in 0..b.len() {
            out[ia * b.len() + ib] = a[ia] * b[ib];
        }
    }
    out
}

/// Kronecker product of a list of vectors, first factor slowest.
pub fn kron_vec_all(factors: &[Array1<C64>], cap: usize) -> Result<Array1<C64>, QndError> {
    let mut out = Array1::from_elem(1, C64::new(1.0, 0.0));
    for f in factors {
        let dim = out.len() * f.len();
        if dim > cap {
            return Err(QndError::DimensionCap { dim, cap });
        }
        out = kron_vec(&out, f);
    }
    Ok(out)
}

/// Trace out all factors not listed in `keep` (ascending factor indices).
///
/// `dims` lists the factor dimensions in slowest-first order and must
/// multiply out to the matrix dimension.
pub fn partial_trace(
    rho: &Array2<C64>,
    dims: &[usize],
    keep: &[usize],
) -> Result<Array2<C64>, QndError> {
    let total: usize = dims.iter().product();
    if rho.nrows() != total || rho.ncols() != total {
        return Err(QndError::DimensionMismatch {
            context: "partial_trace dims product",
            expected: total,
            actual: rho.nrows(),
        });
    }
    if keep.windows(2).any(|w| w[0] >= w[1]) || keep.iter().any(|&k| k >= dims.len()) {
        return Err(QndError::DimensionMismatch {
            context: "partial_trace keep labels",
            expected: dims.len(),
            actual: keep.len(),
        });
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|k| !keep.contains(k)).collect();

    // Row-major strides: factor k advances by the product of faster dims.
    let stride: Vec<usize> = (0..dims.len())
        .map(|k| dims[k + 1..].iter().product())
        .collect();
    let kept_dim: usize = keep.iter().map(|&k| dims[k]).product();
    let traced_dim: usize = traced.iter().map(|&k| dims[k]).product();

    // Flat offset of a multi-index drawn from the `which` factors.
    let offset = |which: &[usize], mut flat: usize| -> usize {
        let mut off = 0;
        for &k in which.iter().rev() {
            off += (flat % dims[k]) * stride[k];
            flat /= dims[k];
        }
        off
    };

    let mut out = Array2::zeros((kept_dim, kept_dim));
    for r in 0..kept_dim {
        let row_base = offset(keep, r);
        for c in 0..kept_dim {
            let col_base = offset(keep, c);
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..traced_dim {
                let off = offset(&traced, s);
                acc += rho[(row_base + off, col_base + off)];
            }
            out[(r, c)] = acc;
        }
    }
    Ok(out)
}
