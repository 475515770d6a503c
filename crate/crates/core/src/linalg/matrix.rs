use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

use super::vector::DenseVector;

/// Symmetric matrix stored as a full square, row-major.
///
/// Symmetry is exact: every constructor and update writes the lower triangle
/// and mirrors it into the upper one.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricMatrix<T> {
    order: usize,
    entries: Vec<T>,
}

impl<T: Real> SymmetricMatrix<T> {
    pub fn zeros(order: usize) -> Self {
        assert!(order > 0, "matrix order must be positive");
        Self {
            order,
            entries: vec![T::zero(); order * order],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_diagonal(&vec![T::one(); order]).expect("identity is finite")
    }

    pub fn from_diagonal(diag: &[T]) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Empty("diagonal"));
        }
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("diagonal"));
        }
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * m.order + i] = d;
        }
        Ok(m)
    }

    /// Builds from full row-major storage; the input must already be exactly
    /// symmetric and finite.
    pub fn from_row_major(order: usize, entries: Vec<T>) -> Result<Self> {
        if order == 0 {
            return Err(Error::Empty("matrix"));
        }
        check_dim(order * order, entries.len())?;
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entries"));
        }
        for i in 0..order {
            for j in 0..i {
                if entries[i * order + j] != entries[j * order + i] {
                    return Err(Error::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(Self { order, entries })
    }

    /// Builds from a function evaluated on the lower triangle (`j <= i`).
    pub fn from_lower_fn(order: usize, mut f: impl FnMut(usize, usize) -> T) -> Result<Self> {
        if order == 0 {
            return Err(Error::Empty("matrix"));
        }
        let mut m = Self::zeros(order);
        for i in 0..order {
            for j in 0..=i {
                let v = f(i, j);
                if !v.is_finite() {
                    return Err(Error::NonFinite("matrix entries"));
                }
                m.entries[i * order + j] = v;
            }
        }
        m.mirror_lower();
        Ok(m)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, row: usize, col: usize) -> T {
        self.entries[row * self.order + col]
    }

    pub fn row(&self, row: usize) -> &[T] {
        &self.entries[row * self.order..(row + 1) * self.order]
    }

    pub fn as_row_major(&self) -> &[T] {
        &self.entries
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.order).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &DenseVector<T>) -> Result<DenseVector<T>> {
        check_dim(self.order, x.dim())?;
        let mut out = vec![T::zero(); self.order];
        self.apply_into(x.as_slice(), &mut out);
        Ok(DenseVector::from_vec_unchecked(out))
    }

    pub(crate) fn apply_into(&self, x: &[T], out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = super::vector::dot(self.row(i), x);
        }
    }

    /// In-place `self += scale * a * a'`.
    pub fn add_outer(&mut self, a: &DenseVector<T>, scale: T) -> Result<()> {
        check_dim(self.order, a.dim())?;
        let n = self.order;
        let a = a.as_slice();
        for i in 0..n {
            let si = scale * a[i];
            for j in 0..=i {
                self.entries[i * n + j] += si * a[j];
            }
        }
        self.mirror_lower();
        Ok(())
    }

    /// In-place `self += scale * diag`.
    pub fn add_diagonal(&mut self, diag: &[T], scale: T) -> Result<()> {
        check_dim(self.order, diag.len())?;
        for (i, &d) in diag.iter().enumerate() {
            self.entries[i * self.order + i] += scale * d;
        }
        Ok(())
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<T> {
        check_dim(self.order, other.order)?;
        Ok(self
            .entries
            .iter()
            .zip(&other.entries)
            .fold(T::zero(), |acc, (&a, &b)| acc.max((a - b).abs())))
    }

    pub(crate) fn mirror_lower(&mut self) {
        let n = self.order;
        for i in 0..n {
            for j in 0..i {
                self.entries[j * n + i] = self.entries[i * n + j];
            }
        }
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [T] {
        &mut self.entries
    }
}

/// Strictly positive diagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalWeights<T> {
    diag: Vec<T>,
}

impl<T: Real> DiagonalWeights<T> {
    pub fn new(diag: Vec<T>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::Empty("weights"));
        }
        if diag.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("weights"));
        }
        if let Some(bad) = diag.iter().find(|&&v| v <= T::zero()) {
            return Err(Error::InvalidParameter(format!(
                "weights must be strictly positive, found {bad}"
            )));
        }
        Ok(Self { diag })
    }

    pub fn constant(order: usize, value: T) -> Result<Self> {
        Self::new(vec![value; order])
    }

    pub fn order(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    pub fn min(&self) -> T {
        self.diag.iter().fold(T::infinity(), |acc, &v| acc.min(v))
    }
}

/// `Q + a a'` as a new matrix.
pub fn rank1_update<T: Real>(q: &SymmetricMatrix<T>, a: &DenseVector<T>) -> Result<SymmetricMatrix<T>> {
    let mut out = q.clone();
    out.add_outer(a, T::one())?;
    Ok(out)
}
