use std::ops::Index;

use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

/// Dense real vector with finite entries.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseVector<T> {
    entries: Vec<T>,
}

impl<T: Real> DenseVector<T> {
    /// Builds a vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<T>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Empty("vector"));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("vector entries"));
        }
        Ok(Self { entries })
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "vector dimension must be positive");
        Self {
            entries: vec![T::zero(); dim],
        }
    }

    pub fn from_fn(dim: usize, f: impl FnMut(usize) -> T) -> Result<Self> {
        Self::new((0..dim).map(f).collect())
    }

    /// Internal constructor for entries already known to be finite.
    pub(crate) fn from_vec_unchecked(entries: Vec<T>) -> Self {
        debug_assert!(!entries.is_empty());
        Self { entries }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn as_slice(&self) -> &[T] {
        &self.entries
    }

    pub fn into_vec(self) -> Vec<T> {
        self.entries
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    pub fn dot(&self, other: &Self) -> Result<T> {
        check_dim(self.dim(), other.dim())?;
        Ok(dot(&self.entries, &other.entries))
    }

    pub fn norm(&self) -> T {
        norm(&self.entries)
    }

    pub fn norm_l1(&self) -> T {
        self.entries.iter().map(|v| v.abs()).sum()
    }

    pub fn max_abs(&self) -> T {
        self.entries
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    /// `self - other`
    pub fn sub(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim(), other.dim())?;
        Ok(Self::from_vec_unchecked(
            self.entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a - b)
                .collect(),
        ))
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self::from_vec_unchecked(self.entries.iter().map(|&v| v * factor).collect())
    }

    /// `self += factor * other`
    pub fn axpy(&mut self, factor: T, other: &Self) -> Result<()> {
        check_dim(self.dim(), other.dim())?;
        axpy(&mut self.entries, factor, &other.entries);
        Ok(())
    }

    /// Converts every entry to another scalar type.
    pub fn cast<U: Real>(&self) -> DenseVector<U> {
        DenseVector::from_vec_unchecked(
            self.entries
                .iter()
                .map(|v| U::lit(v.to_f64_lossy()))
                .collect(),
        )
    }
}

impl<T> Index<usize> for DenseVector<T> {
    type Output = T;

    fn index(&self, index: usize) -> &T {
        &self.entries[index]
    }
}

impl<T: Real> TryFrom<Vec<T>> for DenseVector<T> {
    type Error = Error;

    fn try_from(entries: Vec<T>) -> Result<Self> {
        Self::new(entries)
    }
}

pub(crate) fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub(crate) fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

pub(crate) fn axpy<T: Real>(y: &mut [T], factor: T, x: &[T]) {
    for (yi, &xi) in y.iter_mut().zip(x) {
        *yi += factor * xi;
    }
}
