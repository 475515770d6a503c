use crate::error::{check_dim, Error, Result};
use crate::scalar::Real;

use super::matrix::SymmetricMatrix;
use super::vector::DenseVector;

/// Lower-triangular Cholesky factor `L` with `A = L L'`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    order: usize,
    lower: Vec<T>,
}

impl<T: Real> Cholesky<T> {
    pub fn factor(a: &SymmetricMatrix<T>) -> Result<Self> {
        let n = a.order();
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut d = a.get(j, j);
            for k in 0..j {
                d -= l[j * n + k] * l[j * n + k];
            }
            if !(d > T::zero()) || !d.is_finite() {
                return Err(Error::NotPositiveDefinite {
                    pivot: j,
                    value: d.to_f64_lossy(),
                });
            }
            let d = d.sqrt();
            l[j * n + j] = d;
            for i in (j + 1)..n {
                let mut s = a.get(i, j);
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / d;
            }
        }
        Ok(Self { order: n, lower: l })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn solve(&self, b: &DenseVector<T>) -> Result<DenseVector<T>> {
        check_dim(self.order, b.dim())?;
        let mut x = b.as_slice().to_vec();
        self.solve_in_place(&mut x);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("direct solve"));
        }
        Ok(DenseVector::from_vec_unchecked(x))
    }

    fn solve_in_place(&self, x: &mut [T]) {
        let n = self.order;
        let l = &self.lower;
        for i in 0..n {
            let mut s = x[i];
            for k in 0..i {
                s -= l[i * n + k] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in (i + 1)..n {
                s -= l[k * n + i] * x[k];
            }
            x[i] = s / l[i * n + i];
        }
    }

    pub fn inverse(&self) -> SymmetricMatrix<T> {
        let n = self.order;
        let mut inv = SymmetricMatrix::zeros(n);
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            col.iter_mut().for_each(|v| *v = T::zero());
            col[j] = T::one();
            self.solve_in_place(&mut col);
            for i in j..n {
                inv.entries_mut()[i * n + j] = col[i];
            }
        }
        inv.mirror_lower();
        inv
    }
}

/// Solves `A x = b` for symmetric positive-definite `A` by Cholesky factorization.
pub fn direct_solve<T: Real>(a: &SymmetricMatrix<T>, b: &DenseVector<T>) -> Result<DenseVector<T>> {
    check_dim(a.order(), b.dim())?;
    Cholesky::factor(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-14)
    }

    #[test]
    fn identity_solve() {
        let a = SymmetricMatrix::<f64>::identity(2);
        let b = DenseVector::new(vec![5.0, -3.0]).unwrap();
        assert_eq!(direct_solve(&a, &b).unwrap().as_slice(), &[5.0, -3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let a = SymmetricMatrix::from_diagonal(&[2.0, 4.0]).unwrap();
        let b = DenseVector::new(vec![2.0, 4.0]).unwrap();
        assert!(close(direct_solve(&a, &b).unwrap().as_slice(), &[1.0, 1.0]));
    }

    #[test]
    fn rejects_indefinite() {
        let a = SymmetricMatrix::from_row_major(2, vec![1.0, 2.0, 2.0, 1.0]).unwrap();
        let b = DenseVector::new(vec![1.0, 1.0]).unwrap();
        assert!(matches!(
            direct_solve(&a, &b),
            Err(Error::NotPositiveDefinite { pivot: 1, .. })
        ));
    }

    #[test]
    fn inverse_of_diagonal() {
        let a = SymmetricMatrix::from_diagonal(&[2.0, 4.0, 8.0]).unwrap();
        let inv = Cholesky::factor(&a).unwrap().inverse();
        assert!(close(&inv.diagonal(), &[0.5, 0.25, 0.125]));
        assert_eq!(inv.get(0, 1), 0.0);
    }
}
