use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

use super::matrix::SymmetricMatrix;
use super::vector::{dot, DenseVector};

/// Relative singularity threshold on `1 + v' A^-1 u`.
pub const SINGULARITY_THRESHOLD: f64 = 1e-12;

/// Returns `(A + u v')^-1` given `A^-1`.
///
/// Only symmetric results are representable. With `u == v` the result is
/// symmetric by construction and is mirrored from its lower triangle; for
/// `u != v` the update is accepted only if it happens to come out symmetric.
pub fn sherman_morrison_update<T: Real>(
    a_inv: &SymmetricMatrix<T>,
    u: &DenseVector<T>,
    v: &DenseVector<T>,
) -> Result<SymmetricMatrix<T>> {
    let n = a_inv.order();
    check_dim(n, u.dim())?;
    check_dim(n, v.dim())?;

    let mut ainv_u = vec![T::zero(); n];
    a_inv.apply_into(u.as_slice(), &mut ainv_u);
    // A_inv symmetric, so v' A_inv = (A_inv v)'.
    let mut ainv_v = vec![T::zero(); n];
    a_inv.apply_into(v.as_slice(), &mut ainv_v);

    let quad = dot(v.as_slice(), &ainv_u);
    let denom = T::one() + quad;
    if !denom.is_finite() {
        return Err(Error::NonFinite("sherman-morrison denominator"));
    }
    if denom.abs() < T::lit(SINGULARITY_THRESHOLD) * (T::one() + quad.abs()) {
        return Err(Error::SingularUpdate {
            denominator: denom.abs().to_f64_lossy(),
        });
    }

    let full = |i: usize, j: usize| a_inv.get(i, j) - ainv_u[i] * ainv_v[j] / denom;
    if u == v {
        return SymmetricMatrix::from_lower_fn(n, full);
    }

    let tol = T::lit(1e-12);
    for i in 0..n {
        for j in 0..i {
            let (lo, hi) = (full(i, j), full(j, i));
            if (lo - hi).abs() > tol * (T::one() + lo.abs().max(hi.abs())) {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    SymmetricMatrix::from_lower_fn(n, full)
}
