use crate::error::{check_dim, Result};
use crate::scalar::Real;

use super::matrix::{DiagonalWeights, SymmetricMatrix};

/// A square linear map `x -> A x`, applied into a caller-owned buffer.
pub trait LinearOperator<T> {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[T], out: &mut [T]);
}

impl<T: Real> LinearOperator<T> for SymmetricMatrix<T> {
    fn dim(&self) -> usize {
        self.order()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        self.apply_into(x, out);
    }
}

impl<T: Real, O: LinearOperator<T> + ?Sized> LinearOperator<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        (**self).apply(x, out)
    }
}

/// Wraps a closure as an operator of fixed dimension.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<T, F: Fn(&[T], &mut [T])> LinearOperator<T> for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        (self.f)(x, out)
    }
}

/// `lambda * W + Q` applied without forming the sum.
#[derive(Debug, Clone, Copy)]
pub struct RegularizedGram<'a, T> {
    gram: &'a SymmetricMatrix<T>,
    weights: &'a DiagonalWeights<T>,
    lambda: T,
}

impl<T: Real> LinearOperator<T> for RegularizedGram<'_, T> {
    fn dim(&self) -> usize {
        self.gram.order()
    }

    fn apply(&self, x: &[T], out: &mut [T]) {
        self.gram.apply_into(x, out);
        for ((o, &w), &xi) in out.iter_mut().zip(self.weights.diag()).zip(x) {
            *o += self.lambda * w * xi;
        }
    }
}

impl<'a, T: Real> RegularizedGram<'a, T> {
    pub fn new(gram: &'a SymmetricMatrix<T>, weights: &'a DiagonalWeights<T>, lambda: T) -> Result<Self> {
        check_dim(gram.order(), weights.order())?;
        Ok(Self {
            gram,
            weights,
            lambda,
        })
    }

    /// Materializes `lambda * W + Q`.
    pub fn to_matrix(&self) -> SymmetricMatrix<T> {
        let mut m = self.gram.clone();
        m.add_diagonal(self.weights.diag(), self.lambda)
            .expect("weights and gram share an order");
        m
    }
}
