//! Simulated acquisition: random binary masks, scalar measurements
//! `y = c' z + ξ` and the per-patch focal-plane-array measurement stream.
//!
//! # Randomness contract (version 1)
//!
//! All randomness comes from ChaCha8 as implemented by `rand_chacha` 0.3,
//! keyed with `ChaCha8Rng::seed_from_u64(seed)`. Changing anything below is a
//! breaking change to recorded streams.
//!
//! * Mask bits: stream 0 of the mask seed. Bits are taken least-significant
//!   first from successive `next_u64` words, one bit per pixel in row-major
//!   order. Mask `i` (0-based) of a [`MaskSet`] with base seed `s` uses seed
//!   `s.wrapping_add(i)`.
//! * Gaussian draws: `gaussian(seed, key)` selects stream `key` (word
//!   position 0), reads two words `w1, w2`, sets
//!   `u1 = ((w1 >> 11) + 1) * 2^-53` in (0, 1] and `u2 = (w2 >> 11) * 2^-53`
//!   in [0, 1), and returns `sqrt(-2 ln u1) * cos(2π u2)` (Box–Muller).
//! * Measurement noise for patch `P` (0-based) at time `t` (1-based) uses
//!   key `(P << 32) | t`; [`measure`] alone uses key `t`, which coincides
//!   with patch 0.
//! * Scene noise for sample `k` uses key `SCENE_NOISE_DOMAIN | k`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::error::{check_dim, Error, Result};
use crate::linalg::DenseVector;
use crate::scalar::Real;

pub const RNG_CONTRACT_VERSION: u32 = 1;
pub const SCENE_NOISE_DOMAIN: u64 = 1 << 63;

/// Standard normal draw determined by `(seed, key)`.
pub fn gaussian(seed: u64, key: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    let scale = 1.0 / (1u64 << 53) as f64;
    let u1 = ((rng.next_u64() >> 11) + 1) as f64 * scale;
    let u2 = (rng.next_u64() >> 11) as f64 * scale;
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Noise key for patch `patch` at time `t`.
pub fn noise_key(patch: usize, t: usize) -> u64 {
    ((patch as u64) << 32) | t as u64
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryMask {
    side: usize,
    bits: Vec<u8>,
    seed: u64,
}

/// `side x side` mask with independent Bernoulli(1/2) bits.
pub fn random_binary_mask(side: usize, seed: u64) -> BinaryMask {
    assert!(side > 0, "mask side must be positive");
    let n = side * side;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::with_capacity(n);
    while bits.len() < n {
        let word = rng.next_u64();
        let take = (n - bits.len()).min(64);
        bits.extend((0..take).map(|k| ((word >> k) & 1) as u8));
    }
    BinaryMask { side, bits, seed }
}

impl BinaryMask {
    /// Builds a mask from explicit bits; `seed` is recorded but not checked.
    pub fn from_bits(side: usize, bits: Vec<u8>, seed: u64) -> Result<Self> {
        if side == 0 {
            return Err(Error::Empty("mask"));
        }
        check_dim(side * side, bits.len())?;
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Format("mask bits must be 0 or 1".into()));
        }
        Ok(Self { side, bits, seed })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ones(&self) -> usize {
        self.bits.iter().map(|&b| b as usize).sum()
    }

    pub fn to_vector<T: Real>(&self) -> DenseVector<T> {
        DenseVector::from_vec_unchecked(self.bits.iter().map(|&b| if b == 1 { T::one() } else { T::zero() }).collect())
    }

    /// `c' z`
    pub fn apply<T: Real>(&self, z: &DenseVector<T>) -> Result<T> {
        check_dim(self.bits.len(), z.dim())?;
        Ok(self
            .bits
            .iter()
            .zip(z.iter())
            .filter(|(&b, _)| b == 1)
            .map(|(_, &v)| v)
            .sum())
    }
}

/// Masks for successive time steps, shared by every patch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskSet {
    side: usize,
    seed: u64,
    masks: Vec<BinaryMask>,
}

impl MaskSet {
    pub fn generate(side: usize, count: usize, seed: u64) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidParameter("mask side must be at least 1".into()));
        }
        if count == 0 {
            return Err(Error::InvalidParameter("mask count must be at least 1".into()));
        }
        let masks = (0..count)
            .map(|i| random_binary_mask(side, seed.wrapping_add(i as u64)))
            .collect();
        Ok(Self { side, seed, masks })
    }

    pub fn from_masks(side: usize, seed: u64, masks: Vec<BinaryMask>) -> Result<Self> {
        if masks.is_empty() {
            return Err(Error::Empty("mask set"));
        }
        for m in &masks {
            check_dim(side, m.side())?;
        }
        Ok(Self { side, seed, masks })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn masks(&self) -> &[BinaryMask] {
        &self.masks
    }

    /// Mask for 1-based time step `t`.
    pub fn at(&self, t: usize) -> Option<&BinaryMask> {
        t.checked_sub(1).and_then(|i| self.masks.get(i))
    }

    /// First `count` masks.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 || count > self.len() {
            return Err(Error::InvalidParameter(format!(
                "cannot keep {count} of {} masks",
                self.len()
            )));
        }
        Ok(Self {
            side: self.side,
            seed: self.seed,
            masks: self.masks[..count].to_vec(),
        })
    }

    /// Text form: header `side=<p> count=<m> seed=<s>`, then one line of
    /// `side²` characters `0`/`1` per mask.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity(self.len() * (self.side * self.side + 1) + 64);
        writeln!(out, "side={} count={} seed={}", self.side, self.len(), self.seed).unwrap();
        for m in &self.masks {
            out.extend(m.bits.iter().map(|&b| if b == 1 { '1' } else { '0' }));
            out.push('\n');
        }
        out
    }

    pub fn write_to(&self, mut w: impl Write) -> Result<()> {
        w.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn read_from(r: impl BufRead) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty mask file".into()))??;
        let (side, count, seed) = parse_header(&header)?;
        let mut masks = Vec::with_capacity(count);
        for (i, line) in lines.enumerate() {
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            if line.len() != side * side {
                return Err(Error::Format(format!(
                    "mask line {} has {} characters, expected {}",
                    i + 2,
                    line.len(),
                    side * side
                )));
            }
            let bits = line
                .bytes()
                .map(|c| match c {
                    b'0' => Ok(0),
                    b'1' => Ok(1),
                    _ => Err(Error::Format(format!("invalid character {:?} on mask line {}", c as char, i + 2))),
                })
                .collect::<Result<Vec<u8>>>()?;
            masks.push(BinaryMask::from_bits(side, bits, seed.wrapping_add(masks.len() as u64))?);
        }
        if masks.len() != count {
            return Err(Error::Format(format!(
                "header declares {count} masks, found {}",
                masks.len()
            )));
        }
        Self::from_masks(side, seed, masks)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_from(std::io::BufReader::new(file))
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, u64)> {
    let mut side = None;
    let mut count = None;
    let mut seed = None;
    for field in header.split_whitespace() {
        let (key, value) = field
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("malformed header field {field:?}")))?;
        let bad = |_| Error::Format(format!("invalid value in header field {field:?}"));
        match key {
            "side" => side = Some(value.parse::<usize>().map_err(bad)?),
            "count" => count = Some(value.parse::<usize>().map_err(bad)?),
            "seed" => seed = Some(value.parse::<u64>().map_err(bad)?),
            _ => return Err(Error::Format(format!("unknown header field {key:?}"))),
        }
    }
    match (side, count, seed) {
        (Some(s), Some(c), Some(sd)) if s > 0 && c > 0 => Ok((s, c, sd)),
        (Some(_), Some(_), Some(_)) => Err(Error::Format("side and count must be positive".into())),
        _ => Err(Error::Format("mask header needs side=, count= and seed=".into())),
    }
}

/// Additive Gaussian noise `N(0, sigma²)`; `sigma = 0` is exactly noiseless.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    pub sigma: f64,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma: f64, seed: u64) -> Result<Self> {
        if !(sigma >= 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidParameter(format!("noise sigma must be >= 0, got {sigma}")));
        }
        Ok(Self { sigma, seed })
    }

    pub fn noiseless() -> Self {
        Self { sigma: 0.0, seed: 0 }
    }

    /// Sigma that puts a scene at `target_psnr_db` against itself:
    /// `peak / 10^(psnr / 20)`.
    pub fn for_scene_psnr(target_psnr_db: f64, peak: f64, seed: u64) -> Result<Self> {
        if !target_psnr_db.is_finite() || !(peak > 0.0) {
            return Err(Error::InvalidParameter("target PSNR must be finite and peak positive".into()));
        }
        Self::new(sigma_for_psnr(target_psnr_db, peak), seed)
    }

    pub fn is_noiseless(&self) -> bool {
        self.sigma == 0.0
    }

    /// Noise sample for `key`; exactly zero when noiseless.
    pub fn sample(&self, key: u64) -> f64 {
        if self.is_noiseless() {
            0.0
        } else {
            self.sigma * gaussian(self.seed, key)
        }
    }
}

pub fn sigma_for_psnr(target_psnr_db: f64, peak: f64) -> f64 {
    peak / 10f64.powf(target_psnr_db / 20.0)
}

/// `c' z + ξ` with `ξ` keyed by time step `t`.
pub fn measure<T: Real>(z: &DenseVector<T>, mask: &BinaryMask, noise: &NoiseModel, t: usize) -> Result<T> {
    measure_keyed(z, mask, noise, t as u64)
}

pub fn measure_keyed<T: Real>(z: &DenseVector<T>, mask: &BinaryMask, noise: &NoiseModel, key: u64) -> Result<T> {
    let clean = mask.apply(z)?;
    if noise.is_noiseless() {
        Ok(clean)
    } else {
        Ok(clean + T::lit(noise.sample(key)))
    }
}

/// Adds scene noise to raw samples; sample `k` uses key `SCENE_NOISE_DOMAIN | k`.
pub fn add_scene_noise(samples: &[f64], noise: &NoiseModel) -> Vec<f64> {
    samples
        .iter()
        .enumerate()
        .map(|(k, &s)| s + noise.sample(SCENE_NOISE_DOMAIN | k as u64))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FpaRecord<T> {
    /// 0-based patch index.
    pub patch: usize,
    /// 1-based time step.
    pub t: usize,
    pub y: T,
}

/// Measurement stream for a patch grid: time-major, patch-minor. Mask `t`
/// is shared by every patch; noise is keyed per `(patch, t)`.
pub fn fpa_stream<'a, T: Real>(
    patches: &'a [DenseVector<T>],
    masks: &'a [BinaryMask],
    noise: &'a NoiseModel,
) -> Result<impl Iterator<Item = FpaRecord<T>> + 'a> {
    if let Some(first) = masks.first() {
        for m in masks {
            check_dim(first.len(), m.len())?;
        }
        for z in patches {
            check_dim(first.len(), z.dim())?;
        }
    }
    Ok(masks.iter().enumerate().flat_map(move |(i, mask)| {
        let t = i + 1;
        patches.iter().enumerate().map(move |(p, z)| FpaRecord {
            patch: p,
            t,
            y: measure_keyed(z, mask, noise, noise_key(p, t)).expect("dimensions checked"),
        })
    }))
}
