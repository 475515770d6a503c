use crate::error::{check_dim, Error, Result};
use crate::linalg::DenseVector;
use crate::scalar::Real;

use super::image::ImagePlane;

/// Non-overlapping tiling of a `width x height` plane into `p x p` patches,
/// numbered row-major by block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PatchGrid {
    patch_side: usize,
    cols: usize,
    rows: usize,
}

impl PatchGrid {
    /// Fails unless `patch_side` divides both dimensions.
    pub fn new(width: usize, height: usize, patch_side: usize) -> Result<Self> {
        if patch_side == 0 || width == 0 || height == 0 {
            return Err(Error::Geometry("patch side and image dimensions must be positive".into()));
        }
        if width % patch_side != 0 || height % patch_side != 0 {
            return Err(Error::Geometry(format!(
                "{width}x{height} image is not divisible into {patch_side}x{patch_side} patches"
            )));
        }
        Ok(Self {
            patch_side,
            cols: width / patch_side,
            rows: height / patch_side,
        })
    }

    pub fn for_image(img: &ImagePlane, patch_side: usize) -> Result<Self> {
        Self::new(img.width(), img.height(), patch_side)
    }

    pub fn patch_side(&self) -> usize {
        self.patch_side
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn width(&self) -> usize {
        self.cols * self.patch_side
    }

    pub fn height(&self) -> usize {
        self.rows * self.patch_side
    }

    pub fn len(&self) -> usize {
        self.cols * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pixels_per_patch(&self) -> usize {
        self.patch_side * self.patch_side
    }

    /// Top-left pixel `(x, y)` of patch `index`.
    pub fn origin(&self, index: usize) -> (usize, usize) {
        assert!(index < self.len(), "patch index out of range");
        ((index % self.cols) * self.patch_side, (index / self.cols) * self.patch_side)
    }

    /// Patch containing pixel `(x, y)` and the offset inside it.
    pub fn locate(&self, x: usize, y: usize) -> (usize, usize) {
        let p = self.patch_side;
        ((y / p) * self.cols + x / p, (y % p) * p + x % p)
    }

    fn check_image(&self, img: &ImagePlane) -> Result<()> {
        if img.width() != self.width() || img.height() != self.height() {
            return Err(Error::Geometry(format!(
                "grid covers {}x{} but image is {}x{}",
                self.width(),
                self.height(),
                img.width(),
                img.height()
            )));
        }
        Ok(())
    }
}

/// Row-major `p x p` blocks of one channel, in block order.
pub fn extract_patches<T: Real>(img: &ImagePlane, grid: &PatchGrid, channel: usize) -> Result<Vec<DenseVector<T>>> {
    grid.check_image(img)?;
    if channel >= img.channels() {
        return Err(Error::Geometry(format!("channel {channel} out of range")));
    }
    let p = grid.patch_side();
    Ok((0..grid.len())
        .map(|k| {
            let (x0, y0) = grid.origin(k);
            let mut v = Vec::with_capacity(p * p);
            for i in 0..p {
                for j in 0..p {
                    v.push(T::lit(img.get(x0 + j, y0 + i, channel)));
                }
            }
            DenseVector::from_vec_unchecked(v)
        })
        .collect())
}

/// Inverse of [`extract_patches`]; the returned row-major plane is clamped
/// to `[0, peak]`.
pub fn assemble_patches<T: Real>(patches: &[DenseVector<T>], grid: &PatchGrid, peak: f64) -> Result<Vec<f64>> {
    check_dim(grid.len(), patches.len())?;
    let (w, p) = (grid.width(), grid.patch_side());
    let mut plane = vec![0.0; w * grid.height()];
    for (k, patch) in patches.iter().enumerate() {
        check_dim(p * p, patch.dim())?;
        let (x0, y0) = grid.origin(k);
        for i in 0..p {
            for j in 0..p {
                plane[(y0 + i) * w + x0 + j] = patch[i * p + j].to_f64_lossy().clamp(0.0, peak);
            }
        }
    }
    Ok(plane)
}
