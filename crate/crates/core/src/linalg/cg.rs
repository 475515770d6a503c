//! Conjugate gradient for symmetric positive-definite operators, with warm start.
//!
//! Convergence is declared when the true residual satisfies
//! `‖b - A x‖₂ <= eps * max(‖b‖₂, RESIDUAL_FLOOR)`. The recursively updated
//! residual is only used to decide when to check; on a false alarm the
//! residual is recomputed and the search direction restarted.

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

use super::operator::LinearOperator;
use super::vector::{axpy, dot, norm, DenseVector};

/// Absolute floor applied to `‖b‖₂` in the relative residual test.
pub const RESIDUAL_FLOOR: f64 = 1e-30;

/// Default iteration cap for an order-`n` system.
pub fn default_max_iter(n: usize) -> usize {
    4 * n
}

#[derive(Debug, Clone, PartialEq)]
pub struct CgReport<T> {
    pub solution: DenseVector<T>,
    /// Number of CG update steps performed.
    pub iterations: usize,
    /// `‖b - A x‖₂` at the returned solution.
    pub final_residual_norm: T,
    pub converged: bool,
}

/// Residual threshold `eps * max(‖b‖₂, floor)`.
pub fn residual_threshold<T: Real>(b: &DenseVector<T>, eps: T) -> T {
    eps * b.norm().max(T::lit(RESIDUAL_FLOOR))
}

/// Solves `A x = b` starting from `x0`.
///
/// When the cap is reached without convergence the iterate with the smallest
/// observed residual is returned and `converged` is false.
pub fn cg_solve<T, A>(
    op: &A,
    b: &DenseVector<T>,
    x0: &DenseVector<T>,
    eps: T,
    max_iter: usize,
) -> Result<CgReport<T>>
where
    T: Real,
    A: LinearOperator<T> + ?Sized,
{
    let n = op.dim();
    check_dim(n, b.dim())?;
    check_dim(n, x0.dim())?;
    if !(eps > T::zero()) {
        return Err(Error::InvalidParameter(format!("cg eps must be positive, got {eps}")));
    }

    let threshold = residual_threshold(b, eps);
    let b = b.as_slice();
    let mut x = x0.as_slice().to_vec();
    let mut ap = vec![T::zero(); n];

    let mut r = true_residual(op, b, &x, &mut ap);
    let mut rr = dot(&r, &r);
    if !rr.is_finite() {
        return Err(Error::NonFinite("cg initial residual"));
    }
    let mut r_norm = rr.sqrt();
    if r_norm <= threshold {
        return Ok(CgReport {
            solution: DenseVector::from_vec_unchecked(x),
            iterations: 0,
            final_residual_norm: r_norm,
            converged: true,
        });
    }

    let mut p = r.clone();
    let mut best_x = x.clone();
    let mut best_norm = r_norm;
    let mut iterations = 0;

    while iterations < max_iter {
        op.apply(&p, &mut ap);
        let curvature = dot(&p, &ap);
        if !curvature.is_finite() {
            return Err(Error::NonFinite("cg curvature"));
        }
        if curvature <= T::zero() {
            return Err(Error::NotPositiveDefinite {
                pivot: iterations,
                value: curvature.to_f64_lossy(),
            });
        }
        let alpha = rr / curvature;
        axpy(&mut x, alpha, &p);
        axpy(&mut r, -alpha, &ap);
        iterations += 1;

        let mut rr_new = dot(&r, &r);
        if !rr_new.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cg iterate"));
        }
        r_norm = rr_new.sqrt();

        if r_norm <= threshold {
            r = true_residual(op, b, &x, &mut ap);
            rr_new = dot(&r, &r);
            r_norm = rr_new.sqrt();
            if r_norm <= threshold {
                return Ok(CgReport {
                    solution: DenseVector::from_vec_unchecked(x),
                    iterations,
                    final_residual_norm: r_norm,
                    converged: true,
                });
            }
            // recursive residual drifted; restart from the true one
            p.copy_from_slice(&r);
            rr = rr_new;
        } else {
            let beta = rr_new / rr;
            for (pi, &ri) in p.iter_mut().zip(&r) {
                *pi = ri + beta * *pi;
            }
            rr = rr_new;
        }

        if r_norm < best_norm {
            best_norm = r_norm;
            best_x.copy_from_slice(&x);
        }
    }

    let r = true_residual(op, b, &best_x, &mut ap);
    Ok(CgReport {
        final_residual_norm: norm(&r),
        solution: DenseVector::from_vec_unchecked(best_x),
        iterations,
        converged: false,
    })
}

fn true_residual<T: Real, A: LinearOperator<T> + ?Sized>(op: &A, b: &[T], x: &[T], scratch: &mut [T]) -> Vec<T> {
    op.apply(x, scratch);
    b.iter().zip(scratch.iter()).map(|(&bi, &ai)| bi - ai).collect()
}
