//! Dense Hermitian eigendecomposition via LAPACK `zheev`.
//!
//! The rest of the crate works in row-major `ndarray` storage; this module
//! owns the column-major copy that the Fortran ABI expects and re-exposes the
//! results as ordinary arrays (ascending eigenvalues, eigenvectors in the
//! corresponding columns).

use ndarray::{Array1, Array2};

use crate::error::QndError;
use crate::C64;

extern "C" {
    fn zheev_(
        jobz: *const u8,
        uplo: *const u8,
        n: *const i32,
        a: *mut C64,
        lda: *const i32,
        w: *mut f64,
        work: *mut C64,
        lwork: *const i32,
        rwork: *mut f64,
        info: *mut i32,
    );
}

/// Eigendecomposition of a Hermitian matrix: `h = vectors * diag(values) * vectors^dag`.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Eigenvalues in ascending order.
    pub values: Array1<f64>,
    /// Unitary matrix whose `j`-th column is the eigenvector for `values[j]`.
    pub vectors: Array2<C64>,
}

/// Diagonalize a Hermitian matrix.
///
/// The input is checked against `H = H^dag` to within `herm_tol` (entrywise)
/// before the LAPACK call; only the lower triangle is handed to `zheev`.
pub fn hermitian_eigen(h: &Array2<C64>, herm_tol: f64) -> Result<HermitianEigen, QndError> {
    let n = h.nrows();
    if h.ncols() != n {
        return Err(QndError::DimensionMismatch {
            context: "hermitian_eigen",
            expected: n,
            actual: h.ncols(),
        });
    }
    let mut deviation: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            deviation = deviation.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if deviation > herm_tol {
        return Err(QndError::NonHermitian { deviation });
    }

    // Column-major copy for Fortran.
    let mut a: Vec<C64> = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            a[i + j * n] = h[(i, j)];
        }
    }
    let mut w = vec![0.0f64; n];
    let mut rwork = vec![0.0f64; if n > 1 { 3 * n - 2 } else { 1 }];
    let nn = n as i32;
    let mut info: i32 = 0;

    // Workspace query, then the real call.
    let mut work_len = C64::new(0.0, 0.0);
    let query: i32 = -1;
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            &mut work_len,
            &query,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(QndError::Linalg(format!("zheev workspace query: info = {info}")));
    }
    let lwork = (work_len.re as i32).max(1);
    let mut work = vec![C64::new(0.0, 0.0); lwork as usize];
    unsafe {
        zheev_(
            b"V".as_ptr(),
            b"L".as_ptr(),
            &nn,
            a.as_mut_ptr(),
            &nn,
            w.as_mut_ptr(),
            work.as_mut_ptr(),
            &lwork,
            rwork.as_mut_ptr(),
            &mut info,
        );
    }
    if info != 0 {
        return Err(QndError::Linalg(format!("zheev: info = {info}")));
    }

    let mut vectors = Array2::<C64>::zeros((n, n));
    for j in 0..n {
        for i in 0..n {
            vectors[(i, j)] = a[i + j * n];
        }
    }
    Ok(HermitianEigen {
        values: Array1::from(w),
        vectors,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pauli_x_spectrum() {
        let mut h = Array2::<C64>::zeros((2, 2));
        h[(0, 1)] = C64::new(1.0, 0.0);
        h[(1, 0)] = C64::new(1.0, 0.0);
        let eig = hermitian_eigen(&h, 1e-12).unwrap();
        assert_abs_diff_eq!(eig.values[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.values[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn reconstructs_random_hermitian() {
        let n = 24;
        let mut h = Array2::<C64>::zeros((n, n));
        // Deterministic pseudo-random Hermitian fill.
        let mut s = 1u64;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 33) as f64) / (1u64 << 31) as f64 - 1.0
        };
        for i in 0..n {
            for j in 0..i {
                let v = C64::new(next(), next());
                h[(i, j)] = v;
                h[(j, i)] = v.conj();
            }
            h[(i, i)] = C64::new(next(), 0.0);
        }
        let eig = hermitian_eigen(&h, 1e-12).unwrap();
        // V diag(w) V^dag == H
        let vd = eig
            .vectors
            .dot(&Array2::from_diag(&eig.values.mapv(|x| C64::new(x, 0.0))));
        let rec = vd.dot(&eig.vectors.t().mapv(|z| z.conj()));
        let err = (&rec - &h).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        assert!(err < 1e-12, "reconstruction error {err}");
        // Ascending order.
        for k in 1..n {
            assert!(eig.values[k] >= eig.values[k - 1]);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut h = Array2::<C64>::zeros((2, 2));
        h[(0, 1)] = C64::new(1.0, 0.0);
        h[(1, 0)] = C64::new(0.5, 0.0);
        assert!(matches!(
            hermitian_eigen(&h, 1e-12),
            Err(QndError::NonHermitian { .. })
        ));
    }
}
