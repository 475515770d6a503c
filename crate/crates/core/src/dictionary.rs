//! Orthonormal 2-D DCT-II dictionary for square patches.
//!
//! Pixels and atoms are both indexed row-major: pixel `(i, j)` is entry
//! `i * p + j` of a patch vector and atom `(u, v)` is column `u * p + v`.

use crate::error::{check_dim, Result};
use crate::linalg::DenseVector;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq)]
pub struct Dictionary<T> {
    side: usize,
    /// `n x n`, row-major; row = pixel, column = atom.
    atoms: Vec<T>,
}

/// Builds the DCT-II basis with atom `(u, v)` at pixel `(i, j)` equal to
/// `α(u) α(v) cos(π(2i+1)u / 2p) cos(π(2j+1)v / 2p)`, `α(0) = √(1/p)`,
/// `α(u>0) = √(2/p)`.
pub fn dct2d_dictionary<T: Real>(side: usize) -> Dictionary<T> {
    assert!(side > 0, "patch side must be positive");
    let p = side;
    let pf = p as f64;
    // 1-D basis c[u][i], computed in f64 then converted once.
    let basis: Vec<Vec<f64>> = (0..p)
        .map(|u| {
            let alpha = if u == 0 { (1.0 / pf).sqrt() } else { (2.0 / pf).sqrt() };
            (0..p)
                .map(|i| alpha * (std::f64::consts::PI * (2 * i + 1) as f64 * u as f64 / (2.0 * pf)).cos())
                .collect()
        })
        .collect();

    let n = p * p;
    let mut atoms = vec![T::zero(); n * n];
    for i in 0..p {
        for j in 0..p {
            let pixel = i * p + j;
            for u in 0..p {
                for v in 0..p {
                    atoms[pixel * n + u * p + v] = T::lit(basis[u][i] * basis[v][j]);
                }
            }
        }
    }
    Dictionary { side, atoms }
}

impl<T: Real> Dictionary<T> {
    pub fn side(&self) -> usize {
        self.side
    }

    /// Number of pixels (and atoms), `side²`.
    pub fn order(&self) -> usize {
        self.side * self.side
    }

    pub fn entry(&self, pixel: usize, atom: usize) -> T {
        self.atoms[pixel * self.order() + atom]
    }

    pub fn atom(&self, k: usize) -> Vec<T> {
        (0..self.order()).map(|pixel| self.entry(pixel, k)).collect()
    }

    /// `z = D x`: coefficients to pixels.
    pub fn synthesize(&self, x: &DenseVector<T>) -> Result<DenseVector<T>> {
        let n = self.order();
        check_dim(n, x.dim())?;
        let out = self
            .atoms
            .chunks_exact(n)
            .map(|row| row.iter().zip(x.iter()).map(|(&d, &c)| d * c).sum())
            .collect();
        Ok(DenseVector::from_vec_unchecked(out))
    }

    /// `x = D' z`: pixels to coefficients.
    pub fn analyze(&self, z: &DenseVector<T>) -> Result<DenseVector<T>> {
        let n = self.order();
        check_dim(n, z.dim())?;
        let mut out = vec![T::zero(); n];
        for (row, &zi) in self.atoms.chunks_exact(n).zip(z.iter()) {
            for (o, &d) in out.iter_mut().zip(row) {
                *o += d * zi;
            }
        }
        Ok(DenseVector::from_vec_unchecked(out))
    }
}

/// Coefficient-space sensing vector `a = D' c`, so that `a' x = c' D x`.
pub fn sensing_vector<T: Real>(c: &DenseVector<T>, dictionary: &Dictionary<T>) -> Result<DenseVector<T>> {
    dictionary.analyze(c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_pixel_basis() {
        let d = dct2d_dictionary::<f64>(1);
        assert_eq!(d.order(), 1);
        assert!((d.entry(0, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn orthonormal_for_8x8() {
        let d = dct2d_dictionary::<f64>(8);
        let n = d.order();
        for a in 0..n {
            for b in 0..n {
                let g: f64 = (0..n).map(|p| d.entry(p, a) * d.entry(p, b)).sum();
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((g - expected).abs() <= 1e-12, "gram({a},{b}) = {g}");
            }
        }
        for p in 0..n {
            assert!((d.entry(p, 0) - 0.125).abs() <= 1e-15);
        }
    }

    #[test]
    fn zero_mask_gives_zero_sensing_vector() {
        let d = dct2d_dictionary::<f64>(2);
        let a = sensing_vector(&DenseVector::zeros(4), &d).unwrap();
        assert_eq!(a.as_slice(), &[0.0; 4]);
    }

    #[test]
    fn single_pixel_sensing_vector() {
        let d = dct2d_dictionary::<f64>(1);
        let a = sensing_vector(&DenseVector::new(vec![1.0]).unwrap(), &d).unwrap();
        assert!((a[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch() {
        let d = dct2d_dictionary::<f64>(2);
        assert!(d.synthesize(&DenseVector::zeros(3)).is_err());
        assert!(sensing_vector(&DenseVector::zeros(5), &d).is_err());
    }

    #[test]
    fn construction_is_deterministic() {
        let a = dct2d_dictionary::<f64>(8);
        let b = dct2d_dictionary::<f64>(8);
        assert!(a.atoms.iter().zip(&b.atoms).all(|(x, y)| x.to_bits() == y.to_bits()));
    }
}
