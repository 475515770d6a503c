//! Independent oracles and random-instance builders shared by the
//! integration and acceptance tests. Nothing here calls the library's
//! solvers or metrics.
#![allow(dead_code)]

use orls::imaging::ImagePlane;
use orls::{DenseVector, SymmetricMatrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut StdRng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn dv(x: &[f64]) -> DenseVector<f64> {
    DenseVector::new(x.to_vec()).unwrap()
}

pub fn to_rows(m: &SymmetricMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.order()).map(|i| m.row(i).to_vec()).collect()
}

/// `B B' + shift I` for Gaussian `B`.
pub fn random_spd(rng: &mut StdRng, n: usize, shift: f64) -> SymmetricMatrix<f64> {
    let b: Vec<Vec<f64>> = (0..n).map(|_| gaussian_vec(rng, n)).collect();
    SymmetricMatrix::from_lower_fn(n, |i, j| {
        let s: f64 = (0..n).map(|k| b[i][k] * b[j][k]).sum();
        s + if i == j { shift } else { 0.0 }
    })
    .unwrap()
}

#[derive(Clone, Copy)]
pub enum Spacing {
    Linear,
    Geometric,
}

/// SPD matrix `U diag(s) U'` with eigenvalues spanning `[1, cond]`.
pub fn spd_with_spectrum(rng: &mut StdRng, n: usize, cond: f64, spacing: Spacing) -> SymmetricMatrix<f64> {
    let q = random_orthogonal(rng, n);
    let eig: Vec<f64> = (0..n)
        .map(|k| {
            let s = if n == 1 { 0.0 } else { k as f64 / (n - 1) as f64 };
            match spacing {
                Spacing::Linear => 1.0 + (cond - 1.0) * s,
                Spacing::Geometric => cond.powf(s),
            }
        })
        .collect();
    SymmetricMatrix::from_lower_fn(n, |i, j| (0..n).map(|k| q[i][k] * eig[k] * q[j][k]).sum()).unwrap()
}

/// Gram–Schmidt on a Gaussian matrix; columns orthonormal.
pub fn random_orthogonal(rng: &mut StdRng, n: usize) -> Vec<Vec<f64>> {
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v = gaussian_vec(rng, n);
        for c in &cols {
            let p: f64 = v.iter().zip(c).map(|(a, b)| a * b).sum();
            v.iter_mut().zip(c).for_each(|(a, b)| *a -= p * b);
        }
        let nv = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if nv > 1e-8 {
            cols.push(v.into_iter().map(|a| a / nv).collect());
        }
    }
    (0..n).map(|i| (0..n).map(|k| cols[k][i]).collect()).collect()
}

/// Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(row, &bi)| {
        let mut r = row.clone();
        r.push(bi);
        r
    }).collect();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        m.swap(col, piv);
        for r in (col + 1)..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = ((i + 1)..n).map(|k| m[i][k] * x[k]).sum();
        x[i] = (m[i][n] - s) / m[i][i];
    }
    x
}

pub fn gauss_inverse(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let e: Vec<f64> = (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect();
            gauss_solve(a, &e)
        })
        .collect();
    (0..n).map(|i| (0..n).map(|j| cols[j][i]).collect()).collect()
}

pub fn matvec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(p, q)| p * q).sum()).collect()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max)
}

pub fn rel_err(x: &[f64], truth: &[f64]) -> f64 {
    let d: Vec<f64> = x.iter().zip(truth).map(|(a, b)| a - b).collect();
    norm(&d) / norm(truth)
}

/// `k`-sparse vector with standard-normal nonzeros.
pub fn sparse_vec(rng: &mut StdRng, n: usize, k: usize) -> Vec<f64> {
    let mut x = vec![0.0; n];
    let mut placed = 0;
    while placed < k {
        let i = rng.random_range(0..n);
        if x[i] == 0.0 {
            x[i] = rng.sample::<f64, _>(StandardNormal) + if rng.random::<bool>() { 1.0 } else { -1.0 };
            placed += 1;
        }
    }
    x
}

/// PSNR by explicit loops over pixels and channels.
pub fn naive_psnr(a: &ImagePlane, b: &ImagePlane) -> f64 {
    let mut sum = 0.0;
    for y in 0..a.height() {
        for x in 0..a.width() {
            for c in 0..a.channels() {
                let d = a.get(x, y, c) - b.get(x, y, c);
                sum += d * d;
            }
        }
    }
    let mse = sum / (a.width() * a.height() * a.channels()) as f64;
    10.0 * (a.peak() * a.peak() / mse).log10()
}

/// SSIM over 8x8 non-overlapping windows with two-pass statistics.
pub fn naive_ssim(a: &ImagePlane, b: &ImagePlane) -> f64 {
    let c1 = (0.01 * a.peak()).powi(2);
    let c2 = (0.03 * a.peak()).powi(2);
    let mut per_channel = Vec::new();
    for c in 0..a.channels() {
        let mut scores = Vec::new();
        for by in 0..a.height() / 8 {
            for bx in 0..a.width() / 8 {
                let mut pa = Vec::new();
                let mut pb = Vec::new();
                for y in 0..8 {
                    for x in 0..8 {
                        pa.push(a.get(bx * 8 + x, by * 8 + y, c));
                        pb.push(b.get(bx * 8 + x, by * 8 + y, c));
                    }
                }
                let ma = pa.iter().sum::<f64>() / 64.0;
                let mb = pb.iter().sum::<f64>() / 64.0;
                let va = pa.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / 64.0;
                let vb = pb.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / 64.0;
                let cov = pa.iter().zip(&pb).map(|(p, q)| (p - ma) * (q - mb)).sum::<f64>() / 64.0;
                scores.push(((2.0 * ma * mb + c1) * (2.0 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2)));
            }
        }
        per_channel.push(scores.iter().sum::<f64>() / scores.len() as f64);
    }
    per_channel.iter().sum::<f64>() / per_channel.len() as f64
}

pub fn random_image(rng: &mut StdRng, width: usize, height: usize, channels: usize) -> ImagePlane {
    let samples = (0..width * height * channels)
        .map(|_| rng.random_range(0..=255) as f64)
        .collect();
    ImagePlane::new(width, height, channels, 255.0, samples).unwrap()
}
