//! PSNR and SSIM.
//!
//! SSIM uses 8x8 non-overlapping windows with uniform weights and population
//! statistics, `C1 = (0.01 peak)²`, `C2 = (0.03 peak)²`; windows that do not
//! fit entirely are dropped. Colour images are scored per channel and the
//! channel scores averaged. PSNR pools the squared error of every sample.

use crate::error::{Error, Result};

use super::image::ImagePlane;

pub const SSIM_WINDOW: usize = 8;

fn check_compatible(reference: &ImagePlane, test: &ImagePlane) -> Result<()> {
    if reference.width() != test.width()
        || reference.height() != test.height()
        || reference.channels() != test.channels()
    {
        return Err(Error::Geometry(format!(
            "image mismatch: {}x{}x{} vs {}x{}x{}",
            reference.width(),
            reference.height(),
            reference.channels(),
            test.width(),
            test.height(),
            test.channels()
        )));
    }
    if reference.peak() != test.peak() {
        return Err(Error::Geometry(format!(
            "peak mismatch: {} vs {}",
            reference.peak(),
            test.peak()
        )));
    }
    Ok(())
}

pub fn mse(reference: &ImagePlane, test: &ImagePlane) -> Result<f64> {
    check_compatible(reference, test)?;
    let sum: f64 = reference
        .samples()
        .iter()
        .zip(test.samples())
        .map(|(&a, &b)| (a - b) * (a - b))
        .sum();
    Ok(sum / reference.samples().len() as f64)
}

/// `10 log10(peak² / MSE)` in dB; `f64::INFINITY` for identical images.
pub fn psnr(reference: &ImagePlane, test: &ImagePlane) -> Result<f64> {
    let err = mse(reference, test)?;
    if err == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (reference.peak() * reference.peak() / err).log10())
}

pub fn ssim(reference: &ImagePlane, test: &ImagePlane) -> Result<f64> {
    check_compatible(reference, test)?;
    let (w, h) = (reference.width(), reference.height());
    if w < SSIM_WINDOW || h < SSIM_WINDOW {
        return Err(Error::Geometry(format!(
            "{w}x{h} image is smaller than the {SSIM_WINDOW}x{SSIM_WINDOW} SSIM window"
        )));
    }
    let c1 = (0.01 * reference.peak()).powi(2);
    let c2 = (0.03 * reference.peak()).powi(2);
    let (wx, wy) = (w / SSIM_WINDOW, h / SSIM_WINDOW);
    let count = (SSIM_WINDOW * SSIM_WINDOW) as f64;

    let mut channel_total = 0.0;
    for c in 0..reference.channels() {
        let mut window_total = 0.0;
        for by in 0..wy {
            for bx in 0..wx {
                let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
                for y in by * SSIM_WINDOW..(by + 1) * SSIM_WINDOW {
                    for x in bx * SSIM_WINDOW..(bx + 1) * SSIM_WINDOW {
                        let a = reference.get(x, y, c);
                        let b = test.get(x, y, c);
                        sa += a;
                        sb += b;
                        saa += a * a;
                        sbb += b * b;
                        sab += a * b;
                    }
                }
                let (ma, mb) = (sa / count, sb / count);
                // Clamp tiny negative variances from cancellation.
                let va = (saa / count - ma * ma).max(0.0);
                let vb = (sbb / count - mb * mb).max(0.0);
                let cov = sab / count - ma * mb;
                window_total += ((2.0 * ma * mb + c1) * (2.0 * cov + c2))
                    / ((ma * ma + mb * mb + c1) * (va + vb + c2));
            }
        }
        channel_total += window_total / (wx * wy) as f64;
    }
    Ok(channel_total / reference.channels() as f64)
}

/// Display form: `inf` for the identical-image sentinel.
pub fn format_db(value: f64) -> String {
    if value.is_infinite() && value > 0.0 {
        "inf".to_string()
    } else {
        value.to_string()
    }
}
