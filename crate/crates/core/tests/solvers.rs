mod common;

use common::*;
use orls::linalg::{Cholesky, DiagonalWeights, RegularizedGram, SymmetricMatrix};
use orls::solvers::{
    closed_form_solve, irls_batch_report, objective, orls_run, orls_run_with, MeasurementEvent, OrlsParams,
};
use orls::DenseVector;
use proptest::prelude::*;
use rand::rngs::StdRng;

fn gaussian_events(r: &mut StdRng, x: &[f64], m: usize) -> Vec<MeasurementEvent<f64>> {
    (1..=m)
        .map(|t| {
            let a = gaussian_vec(r, x.len());
            let y = a.iter().zip(x).map(|(p, q)| p * q).sum();
            MeasurementEvent::new(dv(&a), y, t).unwrap()
        })
        .collect()
}

fn sum_sq_residual(events: &[MeasurementEvent<f64>], x: &DenseVector<f64>) -> f64 {
    events.iter().map(|ev| (ev.y - ev.a.dot(x).unwrap()).powi(2)).sum()
}

#[test]
fn orls_matches_closed_form_after_sixteen_events() {
    let mut r = rng(11);
    let x_true = sparse_vec(&mut r, 8, 2);
    let events = gaussian_events(&mut r, &x_true, 16);
    let params = OrlsParams::new(1e-3).with_cg_eps(1e-10);
    let run = orls_run(&events, 8, &params).unwrap();
    let s = &run.state;
    let oracle = closed_form_solve(s.gram(), s.rhs(), s.weights(), params.lambda).unwrap();
    assert!(max_abs_diff(s.estimate().as_slice(), oracle.as_slice()) <= 1e-6);
}

#[test]
fn closed_form_residual_is_small() {
    let mut r = rng(12);
    let q = random_spd(&mut r, 16, 0.0);
    let w = DiagonalWeights::new((0..16).map(|_| 0.1 + rand::Rng::random::<f64>(&mut r)).collect()).unwrap();
    let b = gaussian_vec(&mut r, 16);
    let x = closed_form_solve(&q, &dv(&b), &w, 0.5).unwrap();
    let a = RegularizedGram::new(&q, &w, 0.5).unwrap().to_matrix();
    let res: Vec<f64> = matvec(&to_rows(&a), x.as_slice()).iter().zip(&b).map(|(p, q)| p - q).collect();
    assert!(norm(&res) <= 1e-9 * norm(&b));
}

#[test]
fn irls_recovers_sparse_gaussian_instance() {
    let mut r = rng(13);
    let x_true = sparse_vec(&mut r, 32, 3);
    let rows: Vec<DenseVector<f64>> = (0..32).map(|_| dv(&gaussian_vec(&mut r, 32))).collect();
    let y: Vec<f64> = rows.iter().map(|a| a.dot(&dv(&x_true)).unwrap()).collect();
    let params = OrlsParams::new(1e-3).with_delta(1e-6);
    let report = irls_batch_report(&rows, &y, 32, &params, 30).unwrap();
    assert!(rel_err(report.estimate.as_slice(), &x_true) <= 1e-3);
    let first = report.objectives[0];
    let last = *report.objectives.last().unwrap();
    assert!(last < first, "objective {first} -> {last}");
}

#[test]
fn orls_run_streams_every_step_to_observer() {
    let mut r = rng(14);
    let x_true = sparse_vec(&mut r, 6, 2);
    let events = gaussian_events(&mut r, &x_true, 10);
    let params = OrlsParams::new(1.0);
    let mut seen = Vec::new();
    let state = orls_run_with(&events, 6, &params, |s, outcome| seen.push((s.t(), outcome.iterations))).unwrap();
    assert_eq!(seen.len(), 10);
    assert_eq!(seen.iter().map(|s| s.0).collect::<Vec<_>>(), (1..=10).collect::<Vec<_>>());
    let history: Vec<usize> = seen.iter().map(|s| s.1).collect();
    assert_eq!(state.cg_iterations_history(), history.as_slice());
}

fn lambdas() -> impl Strategy<Value = f64> {
    prop_oneof![Just(1e-3), Just(1.0), Just(40.0)]
}

/// Surrogate majorized by the reweighted quadratic: the IRLS iterates
/// decrease this, not the plain ℓ1 objective.
fn irls_merit(rows: &[DenseVector<f64>], y: &[f64], x: &DenseVector<f64>, lambda: f64, delta: f64) -> f64 {
    let data: f64 = rows.iter().zip(y).map(|(a, &yj)| (yj - a.dot(x).unwrap()).powi(2)).sum();
    let penalty: f64 = x.iter().map(|v| v.abs() - delta * (v.abs() + delta).ln()).sum();
    data + 2.0 * lambda * penalty
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn orls_tracks_closed_form_every_step(seed in any::<u64>(), n in 2usize..32, m in 1usize..40, lambda in prop_oneof![Just(1.0), Just(40.0)]) {
        let mut r = rng(seed);
        let x_true = sparse_vec(&mut r, n, (n / 4).max(1));
        let events = gaussian_events(&mut r, &x_true, m);
        let params = OrlsParams::new(lambda);
        let mut failure = None;
        orls_run_with(&events, n, &params, |s, _| {
            let oracle = closed_form_solve(s.gram(), s.rhs(), s.weights(), lambda).unwrap();
            let diff = s.estimate().sub(&oracle).unwrap().norm();
            if failure.is_none() && diff > 10.0 * params.cg_eps * s.estimate().norm() {
                failure = Some((s.t(), diff));
            }
        }).unwrap();
        prop_assert!(failure.is_none(), "step/diff {:?}", failure);
    }

    #[test]
    fn weights_stay_positive_and_system_stays_spd(seed in any::<u64>(), n in 2usize..24, m in 1usize..30, lambda in lambdas()) {
        let mut r = rng(seed);
        let x_true = sparse_vec(&mut r, n, 2.min(n));
        let events = gaussian_events(&mut r, &x_true, m);
        let params = OrlsParams::new(lambda);
        let mut prev = DenseVector::<f64>::zeros(n);
        let mut ok = true;
        orls_run_with(&events, n, &params, |s, _| {
            let bound = 1.0 / (prev.max_abs() + params.delta);
            ok &= s.weights().min() >= bound && bound > 0.0;
            let a = RegularizedGram::new(s.gram(), s.weights(), lambda).unwrap().to_matrix();
            ok &= Cholesky::factor(&a).is_ok();
            prev = s.estimate().clone();
        }).unwrap();
        prop_assert!(ok);
    }

    #[test]
    fn final_estimate_fits_absorbed_data_best(seed in any::<u64>(), n in 2usize..16, extra in 0usize..8) {
        let mut r = rng(seed);
        let x_true = sparse_vec(&mut r, n, 2.min(n));
        let events = gaussian_events(&mut r, &x_true, n + extra);
        let run = orls_run(&events, n, &OrlsParams::new(1e-6)).unwrap();
        let final_res = sum_sq_residual(&events, run.state.estimate());
        for (t, x) in run.estimates.iter().enumerate() {
            prop_assert!(final_res <= sum_sq_residual(&events, x) + 1e-9, "t={}", t + 1);
        }
    }

    #[test]
    fn irls_merit_does_not_increase(seed in any::<u64>(), n in 2usize..32, m in 1usize..40, lambda in lambdas()) {
        let mut r = rng(seed);
        let x_true = sparse_vec(&mut r, n, (n / 4).max(1));
        let rows: Vec<DenseVector<f64>> = (0..m).map(|_| dv(&gaussian_vec(&mut r, n))).collect();
        let y: Vec<f64> = rows.iter().map(|a| a.dot(&dv(&x_true)).unwrap()).collect();
        let params = OrlsParams::new(lambda);
        let mut prev_merit = irls_merit(&rows, &y, &DenseVector::zeros(n), lambda, params.delta);
        for outer in 1..=12 {
            let x = irls_batch_report(&rows, &y, n, &params, outer).unwrap().estimate;
            let merit = irls_merit(&rows, &y, &x, lambda, params.delta);
            prop_assert!(merit <= prev_merit + 1e-9 * prev_merit.abs().max(1.0), "outer={} {} -> {}", outer, prev_merit, merit);
            prev_merit = merit;
        }
        let report = irls_batch_report(&rows, &y, n, &params, 30).unwrap();
        let direct = objective(&rows, &y, &report.estimate, lambda).unwrap();
        prop_assert_eq!(direct, *report.objectives.last().unwrap());
    }
}

#[test]
fn symmetric_matrix_aliases_compile() {
    let _: SymmetricMatrix<f32> = SymmetricMatrix::identity(2);
    let p = orls::OrlsParams32::noiseless();
    let run = orls_run(&[MeasurementEvent::new(orls::DenseVector32::new(vec![1.0]).unwrap(), 2.0f32, 1).unwrap()], 1, &p.with_delta(1.0));
    assert!((run.unwrap().state.estimate()[0] - 1.0).abs() < 1e-5);
}
