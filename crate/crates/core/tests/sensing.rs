mod common;

use common::*;
use orls::sensing::{
    fpa_stream, gaussian, measure, noise_key, random_binary_mask, BinaryMask, MaskSet, NoiseModel,
};
use orls::{dct2d_dictionary, sensing_vector, DenseVector, Dictionary};
use proptest::prelude::*;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn contract_bits(side: usize, seed: u64) -> Vec<u8> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bits = Vec::new();
    while bits.len() < side * side {
        let w = rng.next_u64();
        for k in 0..64 {
            if bits.len() < side * side {
                bits.push(((w >> k) & 1) as u8);
            }
        }
    }
    bits
}

fn contract_gaussian(seed: u64, key: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(key);
    let (w1, w2) = (rng.next_u64(), rng.next_u64());
    let u1 = ((w1 >> 11) + 1) as f64 / 9007199254740992.0;
    let u2 = (w2 >> 11) as f64 / 9007199254740992.0;
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

#[test]
fn dct_round_trip_side_four() {
    let d: Dictionary<f64> = dct2d_dictionary(4);
    let x = gaussian_vec(&mut rng(21), 16);
    let back = d.analyze(&d.synthesize(&dv(&x)).unwrap()).unwrap();
    assert!(max_abs_diff(back.as_slice(), &x) <= 1e-12);
}

#[test]
fn dct_matches_cosine_formula() {
    let side = 8;
    let d: Dictionary<f64> = dct2d_dictionary(side);
    let alpha = |k: usize| if k == 0 { (1.0 / side as f64).sqrt() } else { (2.0 / side as f64).sqrt() };
    let basis = |k: usize, i: usize| {
        alpha(k) * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * side) as f64).cos()
    };
    for u in 0..side {
        for v in 0..side {
            for r in 0..side {
                for c in 0..side {
                    let expected = basis(u, r) * basis(v, c);
                    assert!((d.entry(r * side + c, u * side + v) - expected).abs() <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn sensing_vector_adjoint_identity() {
    let mut r = rng(22);
    let d: Dictionary<f64> = dct2d_dictionary(8);
    let c = random_binary_mask(8, 99).to_vector::<f64>();
    let x = dv(&gaussian_vec(&mut r, 64));
    let z = d.synthesize(&x).unwrap();
    let a = sensing_vector(&c, &d).unwrap();
    assert!((c.dot(&z).unwrap() - a.dot(&x).unwrap()).abs() <= 1e-10);
}

#[test]
fn dictionary_is_deterministic() {
    let a: Dictionary<f64> = dct2d_dictionary(8);
    let b: Dictionary<f64> = dct2d_dictionary(8);
    for p in 0..64 {
        for k in 0..64 {
            assert_eq!(a.entry(p, k).to_bits(), b.entry(p, k).to_bits());
        }
    }
}

#[test]
fn mask_bits_follow_the_generator_contract() {
    for seed in [0, 1, 7, u64::MAX] {
        for side in [1, 3, 8, 9] {
            assert_eq!(random_binary_mask(side, seed).bits(), contract_bits(side, seed).as_slice());
        }
    }
    let set = MaskSet::generate(4, 5, u64::MAX - 1).unwrap();
    assert_eq!(set.at(1).unwrap().bits(), contract_bits(4, u64::MAX - 1).as_slice());
    assert_eq!(set.at(3).unwrap().bits(), contract_bits(4, 0).as_slice());
}

#[test]
fn gaussian_follows_the_generator_contract() {
    for (seed, key) in [(0, 0), (3, noise_key(5, 17)), (u64::MAX, 1 << 63)] {
        assert_eq!(gaussian(seed, key).to_bits(), contract_gaussian(seed, key).to_bits());
    }
}

#[test]
fn mask_bit_mean_over_many_seeds() {
    let ones: usize = (0..10_000u64).map(|s| random_binary_mask(8, s).ones()).sum();
    let mean = ones as f64 / 640_000.0;
    assert!((0.49..=0.51).contains(&mean), "mean {mean}");
}

#[test]
fn noise_moments() {
    let z = dv(&gaussian_vec(&mut rng(23), 64));
    let mask = random_binary_mask(8, 5);
    let clean = measure(&z, &mask, &NoiseModel::noiseless(), 1).unwrap();
    let noise = NoiseModel::new(2.0, 77).unwrap();
    let ys: Vec<f64> = (1..=10_000).map(|t| measure(&z, &mask, &noise, t).unwrap()).collect();
    let mean = ys.iter().sum::<f64>() / ys.len() as f64;
    let std = (ys.iter().map(|y| (y - mean).powi(2)).sum::<f64>() / (ys.len() - 1) as f64).sqrt();
    assert!((mean - clean).abs() <= 0.1, "mean {mean} vs {clean}");
    assert!((1.9..=2.1).contains(&std), "std {std}");
}

#[test]
fn fpa_stream_brute_force() {
    let mut r = rng(24);
    let patches: Vec<DenseVector<f64>> = (0..4).map(|_| dv(&gaussian_vec(&mut r, 64))).collect();
    let masks = MaskSet::generate(8, 64, 1000).unwrap();
    let noise = NoiseModel::noiseless();
    let records: Vec<_> = fpa_stream(&patches, masks.masks(), &noise).unwrap().collect();
    assert_eq!(records.len(), 256);
    for (i, rec) in records.iter().enumerate() {
        assert_eq!(rec.t, i / 4 + 1);
        assert_eq!(rec.patch, i % 4);
        let bits = masks.at(rec.t).unwrap().bits();
        let expected: f64 = bits
            .iter()
            .zip(patches[rec.patch].as_slice())
            .filter(|(b, _)| **b == 1)
            .map(|(_, z)| z)
            .sum();
        assert!((rec.y - expected).abs() <= 1e-12);
    }
}

#[test]
fn fpa_stream_rejects_mismatched_patch() {
    let masks = MaskSet::generate(8, 2, 0).unwrap();
    let short = vec![DenseVector::<f64>::zeros(16)];
    assert!(fpa_stream(&short, masks.masks(), &NoiseModel::noiseless()).is_err());
}

#[test]
fn mask_file_rejects_malformed_text() {
    assert!(MaskSet::read_from("side=2 count=1 seed=0\n0120\n".as_bytes()).is_err());
    assert!(MaskSet::read_from("side=2 count=2 seed=0\n0110\n".as_bytes()).is_err());
    assert!(MaskSet::read_from("count=1\n0110\n".as_bytes()).is_err());
    assert!(MaskSet::read_from("side=2 count=1 seed=0\n011\n".as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dct_preserves_energy_and_adjoint(seed in any::<u64>(), side in 1usize..10) {
        let mut r = rng(seed);
        let n = side * side;
        let d: Dictionary<f64> = dct2d_dictionary(side);
        let x = dv(&gaussian_vec(&mut r, n));
        let c = dv(&gaussian_vec(&mut r, n));
        let dx = d.synthesize(&x).unwrap();
        prop_assert!((dx.norm() - x.norm()).abs() <= 1e-10);
        let lhs = c.dot(&dx).unwrap();
        let rhs = d.analyze(&c).unwrap().dot(&x).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-10);
    }

    #[test]
    fn noiseless_measurement_equals_sensing_inner_product(seed in any::<u64>(), mask_seed in any::<u64>(), t in 1usize..1000) {
        let d: Dictionary<f64> = dct2d_dictionary(8);
        let x = dv(&gaussian_vec(&mut rng(seed), 64));
        let z = d.synthesize(&x).unwrap();
        let mask = random_binary_mask(8, mask_seed);
        let y = measure(&z, &mask, &NoiseModel::noiseless(), t).unwrap();
        let a = sensing_vector(&mask.to_vector(), &d).unwrap();
        prop_assert!((y - a.dot(&x).unwrap()).abs() <= 1e-10);
    }

    #[test]
    fn stream_is_a_pure_function_of_its_inputs(seed in any::<u64>(), mask_seed in any::<u64>(), noise_seed in any::<u64>()) {
        let mut r = rng(seed);
        let patches: Vec<DenseVector<f64>> = (0..3).map(|_| dv(&gaussian_vec(&mut r, 16))).collect();
        let noise = NoiseModel::new(1.5, noise_seed).unwrap();
        let a: Vec<_> = fpa_stream(&patches, MaskSet::generate(4, 6, mask_seed).unwrap().masks(), &noise).unwrap().collect();
        let b: Vec<_> = fpa_stream(&patches, MaskSet::generate(4, 6, mask_seed).unwrap().masks(), &noise).unwrap().collect();
        prop_assert_eq!(&a, &b);
        // Same mask at t for every patch: identical patches give identical clean values.
        let twins = vec![patches[0].clone(), patches[0].clone()];
        let masks = MaskSet::generate(4, 6, mask_seed).unwrap();
        let clean: Vec<_> = fpa_stream(&twins, masks.masks(), &NoiseModel::noiseless()).unwrap().collect();
        for pair in clean.chunks(2) {
            prop_assert_eq!(pair[0].y, pair[1].y);
        }
    }

    #[test]
    fn mask_file_round_trip(side in 1usize..9, count in 1usize..12, seed in any::<u64>()) {
        let set = MaskSet::generate(side, count, seed).unwrap();
        let text = set.to_text();
        let header = format!("side={} count={} seed={}\n", side, count, seed);
        prop_assert!(text.starts_with(&header));
        let back = MaskSet::read_from(text.as_bytes()).unwrap();
        prop_assert_eq!(back, set);
    }
}

#[test]
fn from_bits_validates() {
    assert!(BinaryMask::from_bits(2, vec![0, 1, 1], 0).is_err());
    assert!(BinaryMask::from_bits(2, vec![0, 1, 2, 0], 0).is_err());
}
