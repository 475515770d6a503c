//! Deterministic 8-bit test scenes for demos and experiments.

use std::str::FromStr;

use crate::error::{Error, Result};

use super::image::ImagePlane;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SceneKind {
    /// Shaded background with a disk, a bar and a soft blob: sharp edges.
    Shapes,
    /// Smooth interfering sinusoids.
    Waves,
    /// Multi-scale sum of cosines with fixed pseudo-random phases.
    Texture,
}

impl SceneKind {
    pub const ALL: [SceneKind; 3] = [SceneKind::Shapes, SceneKind::Waves, SceneKind::Texture];

    pub fn name(&self) -> &'static str {
        match self {
            SceneKind::Shapes => "shapes",
            SceneKind::Waves => "waves",
            SceneKind::Texture => "texture",
        }
    }
}

impl FromStr for SceneKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shapes" => Ok(SceneKind::Shapes),
            "waves" => Ok(SceneKind::Waves),
            "texture" => Ok(SceneKind::Texture),
            other => Err(Error::InvalidParameter(format!("unknown scene kind {other:?}"))),
        }
    }
}

fn shapes(u: f64, v: f64) -> f64 {
    let mut s = 40.0 + 120.0 * u + 30.0 * v;
    if (u - 0.62).powi(2) + (v - 0.38).powi(2) < 0.045 {
        s = 225.0 - 40.0 * v;
    }
    if (0.15..0.32).contains(&u) && (0.2..0.85).contains(&v) {
        s = 20.0 + 15.0 * u;
    }
    s + 50.0 * (-((u - 0.3).powi(2) + (v - 0.2).powi(2)) / 0.01).exp()
}

fn waves(u: f64, v: f64) -> f64 {
    use std::f64::consts::PI;
    128.0 + 70.0 * (2.0 * PI * (1.3 * u + 0.4 * v)).sin() * (2.0 * PI * 0.9 * v).cos() + 25.0 * (2.0 * PI * 2.1 * u * v).cos()
}

fn texture(u: f64, v: f64) -> f64 {
    use std::f64::consts::PI;
    // (frequency_u, frequency_v, phase, amplitude), amplitude ~ 1/f
    const TERMS: [(f64, f64, f64, f64); 8] = [
        (1.0, 0.5, 0.3, 48.0),
        (0.7, 1.4, 2.1, 40.0),
        (2.3, 1.1, 4.0, 22.0),
        (1.8, 3.2, 1.2, 16.0),
        (4.1, 2.6, 5.3, 10.0),
        (3.7, 5.9, 0.8, 7.0),
        (7.3, 4.4, 3.3, 5.0),
        (9.1, 8.2, 2.7, 3.0),
    ];
    128.0
        + TERMS
            .iter()
            .map(|&(fu, fv, ph, amp)| amp * (2.0 * PI * (fu * u + fv * v) + ph).cos())
            .sum::<f64>()
}

/// Grayscale (or 3-channel) 8-bit scene with integer samples in `[0, 255]`.
pub fn synthetic_scene(kind: SceneKind, width: usize, height: usize, color: bool) -> Result<ImagePlane> {
    if width == 0 || height == 0 {
        return Err(Error::Geometry("scene dimensions must be positive".into()));
    }
    let f = match kind {
        SceneKind::Shapes => shapes,
        SceneKind::Waves => waves,
        SceneKind::Texture => texture,
    };
    let sample = |x: usize, y: usize, shift: f64| {
        let u = (x as f64 + 0.5) / width as f64;
        let v = (y as f64 + 0.5) / height as f64;
        f((u + shift).fract(), v).round().clamp(0.0, 255.0)
    };
    if !color {
        return ImagePlane::from_fn(width, height, 255.0, |x, y| sample(x, y, 0.0));
    }
    let planes: Vec<Vec<f64>> = [0.0, 0.13, 0.37]
        .iter()
        .map(|&shift| {
            (0..height)
                .flat_map(|y| (0..width).map(move |x| (x, y)))
                .map(|(x, y)| sample(x, y, shift))
                .collect()
        })
        .collect();
    ImagePlane::from_channels(width, height, 255.0, &planes)
}
