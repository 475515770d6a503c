use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{check_dim, Error, Result};

/// Interleaved image samples in `[0, peak]` (intermediate values may exceed
/// the range; writers clamp).
#[derive(Debug, Clone, PartialEq)]
pub struct ImagePlane {
    width: usize,
    height: usize,
    channels: usize,
    peak: f64,
    samples: Vec<f64>,
}

impl ImagePlane {
    pub fn new(width: usize, height: usize, channels: usize, peak: f64, samples: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Geometry("image dimensions must be positive".into()));
        }
        if channels != 1 && channels != 3 {
            return Err(Error::Geometry(format!("expected 1 or 3 channels, got {channels}")));
        }
        if !(peak > 0.0) || !peak.is_finite() {
            return Err(Error::InvalidParameter(format!("peak must be positive, got {peak}")));
        }
        check_dim(width * height * channels, samples.len())?;
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("image samples"));
        }
        Ok(Self {
            width,
            height,
            channels,
            peak,
            samples,
        })
    }

    pub fn from_fn(width: usize, height: usize, peak: f64, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, 1, peak, samples)
    }

    /// Interleaves per-channel planes (each `width * height`, row-major).
    pub fn from_channels(width: usize, height: usize, peak: f64, planes: &[Vec<f64>]) -> Result<Self> {
        let channels = planes.len();
        for p in planes {
            check_dim(width * height, p.len())?;
        }
        let mut samples = vec![0.0; width * height * channels];
        for (c, plane) in planes.iter().enumerate() {
            for (k, &v) in plane.iter().enumerate() {
                samples[k * channels + c] = v;
            }
        }
        Self::new(width, height, channels, peak, samples)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn peak(&self) -> f64 {
        self.peak
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn get(&self, x: usize, y: usize, channel: usize) -> f64 {
        self.samples[(y * self.width + x) * self.channels + channel]
    }

    /// One channel as a row-major plane.
    pub fn channel(&self, channel: usize) -> Vec<f64> {
        assert!(channel < self.channels, "channel out of range");
        self.samples.iter().skip(channel).step_by(self.channels).copied().collect()
    }

    pub fn with_samples(&self, samples: Vec<f64>) -> Result<Self> {
        Self::new(self.width, self.height, self.channels, self.peak, samples)
    }

    pub fn clamped(&self) -> Self {
        let peak = self.peak;
        Self {
            samples: self.samples.iter().map(|v| v.clamp(0.0, peak)).collect(),
            ..self.clone()
        }
    }

    /// Quantizes to 8 bits, mapping `[0, peak]` onto `0..=255`.
    pub fn quantized(&self) -> Self {
        let bytes = self.to_bytes();
        Self {
            samples: bytes.iter().map(|&b| b as f64 * self.peak / 255.0).collect(),
            ..self.clone()
        }
    }

    /// Top-left crop to the largest multiple of `side` in each dimension.
    pub fn crop_to_multiple(&self, side: usize) -> Result<Self> {
        if side == 0 {
            return Err(Error::Geometry("crop side must be positive".into()));
        }
        let w = self.width / side * side;
        let h = self.height / side * side;
        if w == 0 || h == 0 {
            return Err(Error::Geometry(format!(
                "{}x{} image is smaller than one {side}x{side} patch",
                self.width, self.height
            )));
        }
        let mut samples = Vec::with_capacity(w * h * self.channels);
        for y in 0..h {
            let start = y * self.width * self.channels;
            samples.extend_from_slice(&self.samples[start..start + w * self.channels]);
        }
        Self::new(w, h, self.channels, self.peak, samples)
    }

    fn to_bytes(&self) -> Vec<u8> {
        let scale = 255.0 / self.peak;
        self.samples
            .iter()
            .map(|&v| (v.clamp(0.0, self.peak) * scale).round() as u8)
            .collect()
    }

    /// Binary PGM (P5) for one channel, PPM (P6) for three; 8-bit.
    pub fn write_pnm(&self, mut w: impl Write) -> Result<()> {
        let magic = if self.channels == 1 { "P5" } else { "P6" };
        write!(w, "{magic}\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn save_pnm(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut buf = Vec::new();
        self.write_pnm(&mut buf)?;
        std::fs::write(path, buf)?;
        Ok(())
    }

    /// Reads binary P5/P6 with `maxval <= 255`; `peak` becomes `maxval`.
    pub fn read_pnm(mut r: impl BufRead) -> Result<Self> {
        let magic = read_token(&mut r)?;
        let channels = match magic.as_str() {
            "P5" => 1,
            "P6" => 3,
            other => return Err(Error::Format(format!("unsupported PNM magic {other:?}"))),
        };
        let width = parse_token(&mut r, "width")?;
        let height = parse_token(&mut r, "height")?;
        let maxval = parse_token(&mut r, "maxval")?;
        if maxval == 0 || maxval > 255 {
            return Err(Error::Format(format!("only 8-bit PNM is supported (maxval {maxval})")));
        }
        let mut data = vec![0u8; width * height * channels];
        r.read_exact(&mut data)
            .map_err(|_| Error::Format("truncated PNM pixel data".into()))?;
        Self::new(
            width,
            height,
            channels,
            maxval as f64,
            data.into_iter().map(f64::from).collect(),
        )
    }

    pub fn load_pnm(path: impl AsRef<Path>) -> Result<Self> {
        let bytes = std::fs::read(path)?;
        Self::read_pnm(bytes.as_slice())
    }
}

/// Reads one whitespace-delimited header token, skipping `#` comments, and
/// consumes exactly one trailing whitespace byte.
fn read_token(r: &mut impl BufRead) -> Result<String> {
    let mut token = Vec::new();
    let mut byte = [0u8; 1];
    loop {
        if r.read(&mut byte)? == 0 {
            if token.is_empty() {
                return Err(Error::Format("truncated PNM header".into()));
            }
            break;
        }
        let c = byte[0];
        if token.is_empty() {
            if c == b'#' {
                let mut skip = Vec::new();
                r.read_until(b'\n', &mut skip)?;
            } else if !c.is_ascii_whitespace() {
                token.push(c);
            }
        } else if c.is_ascii_whitespace() {
            break;
        } else {
            token.push(c);
        }
    }
    String::from_utf8(token).map_err(|_| Error::Format("non-ASCII PNM header".into()))
}

fn parse_token(r: &mut impl BufRead, what: &str) -> Result<usize> {
    let tok = read_token(r)?;
    tok.parse()
        .map_err(|_| Error::Format(format!("invalid PNM {what} {tok:?}")))
}
