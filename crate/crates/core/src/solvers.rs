//! Online reweighted least squares (ORLS) and the batch IRLS baseline.
//!
//! Both minimize `Σ (y_j - a_j' x)² + λ ‖x‖₁` by replacing the ℓ1 term with
//! the weighted quadratic `λ x' W x`, `W(j) = 1 / (|x(j)| + δ)`, rebuilt from
//! the latest estimate. ORLS absorbs one measurement per step and refreshes
//! the weights once, solving `(λ W_t + Q_t) x = b_t` by conjugate gradient
//! warm-started at the previous estimate. IRLS keeps every measurement and
//! alternates exact solves with weight refreshes.

use crate::error::{check_dim, Error, Result};
use crate::linalg::{
    cg_solve, default_max_iter, direct_solve, DenseVector, DiagonalWeights, RegularizedGram,
    SymmetricMatrix,
};
use crate::scalar::Real;

pub const DEFAULT_DELTA: f64 = 1e-6;
pub const DEFAULT_CG_EPS: f64 = 1e-5;
/// Regularization weight for noiseless acquisitions.
pub const LAMBDA_NOISELESS: f64 = 1.0;
/// Regularization weight for the noisy-scene regime.
pub const LAMBDA_NOISY: f64 = 40.0;
pub const DEFAULT_IRLS_OUTER: usize = 30;
/// IRLS stops early once `‖x_new - x_old‖ <= IRLS_STEP_TOL * (1 + ‖x_old‖)`.
pub const IRLS_STEP_TOL: f64 = 1e-8;

/// Initial guess handed to CG at each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CgStart {
    /// Warm start from the previous estimate.
    #[default]
    Previous,
    /// Cold start from zero; only useful for measuring the warm-start gain.
    Zero,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrlsParams<T> {
    pub lambda: T,
    pub delta: T,
    pub cg_eps: T,
    /// CG iteration cap per step; `None` means `4 n`.
    pub cg_max_iter: Option<usize>,
    pub cg_start: CgStart,
}

impl<T: Real> OrlsParams<T> {
    pub fn new(lambda: T) -> Self {
        Self {
            lambda,
            delta: T::lit(DEFAULT_DELTA),
            cg_eps: T::lit(DEFAULT_CG_EPS),
            cg_max_iter: None,
            cg_start: CgStart::Previous,
        }
    }

    pub fn noiseless() -> Self {
        Self::new(T::lit(LAMBDA_NOISELESS))
    }

    pub fn noisy() -> Self {
        Self::new(T::lit(LAMBDA_NOISY))
    }

    pub fn with_delta(mut self, delta: T) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_cg_eps(mut self, cg_eps: T) -> Self {
        self.cg_eps = cg_eps;
        self
    }

    pub fn with_cg_max_iter(mut self, cap: usize) -> Self {
        self.cg_max_iter = Some(cap);
        self
    }

    pub fn with_cg_start(mut self, start: CgStart) -> Self {
        self.cg_start = start;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: T| {
            if v > T::zero() && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("lambda", self.lambda)?;
        positive("delta", self.delta)?;
        positive("cg_eps", self.cg_eps)?;
        if self.cg_max_iter == Some(0) {
            return Err(Error::InvalidParameter("cg_max_iter must be at least 1".into()));
        }
        Ok(())
    }

    pub fn max_iter_for(&self, dim: usize) -> usize {
        self.cg_max_iter.unwrap_or_else(|| default_max_iter(dim))
    }
}

/// One sequentially arriving measurement `y = a' x* + noise`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEvent<T> {
    pub a: DenseVector<T>,
    pub y: T,
    /// 1-based arrival index.
    pub t: usize,
}

impl<T: Real> MeasurementEvent<T> {
    pub fn new(a: DenseVector<T>, y: T, t: usize) -> Result<Self> {
        if !y.is_finite() {
            return Err(Error::NonFinite("measurement value"));
        }
        if t == 0 {
            return Err(Error::InvalidParameter("arrival index is 1-based".into()));
        }
        Ok(Self { a, y, t })
    }
}

/// `W(j) = 1 / (|x(j)| + δ)`.
pub fn weight_update<T: Real>(x: &DenseVector<T>, delta: T) -> Result<DiagonalWeights<T>> {
    if !(delta > T::zero()) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
    }
    DiagonalWeights::new(x.iter().map(|&v| T::one() / (v.abs() + delta)).collect())
}

/// Exact minimizer `(λ W + Q)^-1 b` of the weighted quadratic problem.
pub fn closed_form_solve<T: Real>(
    q: &SymmetricMatrix<T>,
    b: &DenseVector<T>,
    w: &DiagonalWeights<T>,
    lambda: T,
) -> Result<DenseVector<T>> {
    check_dim(q.order(), b.dim())?;
    let a = RegularizedGram::new(q, w, lambda)?.to_matrix();
    direct_solve(&a, b)
}

/// `Σ (y_j - a_j' x)² + λ ‖x‖₁`.
pub fn objective<T: Real>(rows: &[DenseVector<T>], y: &[T], x: &DenseVector<T>, lambda: T) -> Result<T> {
    check_dim(rows.len(), y.len())?;
    let mut data = T::zero();
    for (a, &yj) in rows.iter().zip(y) {
        let r = yj - a.dot(x)?;
        data += r * r;
    }
    Ok(data + lambda * x.norm_l1())
}

/// Outcome of a single ORLS step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub iterations: usize,
    pub converged: bool,
    pub residual_norm: f64,
}

/// Recursive solver state for one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct OrlsState<T> {
    t: usize,
    gram: SymmetricMatrix<T>,
    rhs: DenseVector<T>,
    estimate: DenseVector<T>,
    weights: DiagonalWeights<T>,
    cg_iterations_history: Vec<usize>,
    nonconverged_steps: usize,
}

/// Zero estimate, zero accumulators, weights `(1/δ) I`.
pub fn orls_init<T: Real>(dim: usize, params: &OrlsParams<T>) -> Result<OrlsState<T>> {
    params.validate()?;
    if dim == 0 {
        return Err(Error::Empty("solver dimension"));
    }
    let estimate = DenseVector::zeros(dim);
    let weights = weight_update(&estimate, params.delta)?;
    Ok(OrlsState {
        t: 0,
        gram: SymmetricMatrix::zeros(dim),
        rhs: DenseVector::zeros(dim),
        estimate,
        weights,
        cg_iterations_history: Vec::new(),
        nonconverged_steps: 0,
    })
}

impl<T: Real> OrlsState<T> {
    pub fn new(dim: usize, params: &OrlsParams<T>) -> Result<Self> {
        orls_init(dim, params)
    }

    /// Number of measurements absorbed.
    pub fn t(&self) -> usize {
        self.t
    }

    pub fn dim(&self) -> usize {
        self.estimate.dim()
    }

    /// `Q_t = Σ a_j a_j'`
    pub fn gram(&self) -> &SymmetricMatrix<T> {
        &self.gram
    }

    /// `b_t = Σ y_j a_j`
    pub fn rhs(&self) -> &DenseVector<T> {
        &self.rhs
    }

    pub fn estimate(&self) -> &DenseVector<T> {
        &self.estimate
    }

    /// Weights used by the most recent solve.
    pub fn weights(&self) -> &DiagonalWeights<T> {
        &self.weights
    }

    pub fn cg_iterations_history(&self) -> &[usize] {
        &self.cg_iterations_history
    }

    pub fn nonconverged_steps(&self) -> usize {
        self.nonconverged_steps
    }

    /// Residual `‖(λ W + Q) x - b‖₂` of the current estimate.
    pub fn system_residual(&self, lambda: T) -> T {
        let op = RegularizedGram::new(&self.gram, &self.weights, lambda).expect("consistent state");
        let mut out = vec![T::zero(); self.dim()];
        crate::linalg::LinearOperator::apply(&op, self.estimate.as_slice(), &mut out);
        out.iter()
            .zip(self.rhs.iter())
            .map(|(&o, &b)| (o - b) * (o - b))
            .sum::<T>()
            .sqrt()
    }

    /// Absorbs one measurement.
    ///
    /// Weights are rebuilt from the previous estimate before the solve, and
    /// CG starts from that estimate. A step that hits the iteration cap keeps
    /// its best iterate and is reported through `StepOutcome::converged`.
    /// If an error is returned after validation the state must be discarded.
    pub fn step(&mut self, ev: &MeasurementEvent<T>, params: &OrlsParams<T>) -> Result<StepOutcome> {
        let n = self.dim();
        check_dim(n, ev.a.dim())?;
        if !ev.y.is_finite() {
            return Err(Error::NonFinite("measurement value"));
        }

        let weights = weight_update(&self.estimate, params.delta)?;
        self.gram.add_outer(&ev.a, T::one())?;
        self.rhs.axpy(ev.y, &ev.a)?;

        let op = RegularizedGram::new(&self.gram, &weights, params.lambda)?;
        let report = match params.cg_start {
            CgStart::Previous => cg_solve(&op, &self.rhs, &self.estimate, params.cg_eps, params.max_iter_for(n))?,
            CgStart::Zero => cg_solve(&op, &self.rhs, &DenseVector::zeros(n), params.cg_eps, params.max_iter_for(n))?,
        };

        self.t += 1;
        self.weights = weights;
        self.estimate = report.solution;
        self.cg_iterations_history.push(report.iterations);
        if !report.converged {
            self.nonconverged_steps += 1;
        }
        Ok(StepOutcome {
            iterations: report.iterations,
            converged: report.converged,
            residual_norm: report.final_residual_norm.to_f64_lossy(),
        })
    }
}

/// Value-style step: consumes the state and returns its successor.
pub fn orls_step<T: Real>(
    mut state: OrlsState<T>,
    ev: &MeasurementEvent<T>,
    params: &OrlsParams<T>,
) -> Result<OrlsState<T>> {
    state.step(ev, params)?;
    Ok(state)
}

/// Final state plus every intermediate estimate.
#[derive(Debug, Clone)]
pub struct OrlsRun<T> {
    pub state: OrlsState<T>,
    pub estimates: Vec<DenseVector<T>>,
}

/// Folds [`OrlsState::step`] over `events` in order, keeping every estimate.
pub fn orls_run<'a, T: Real>(
    events: impl IntoIterator<Item = &'a MeasurementEvent<T>>,
    dim: usize,
    params: &OrlsParams<T>,
) -> Result<OrlsRun<T>> {
    let mut estimates = Vec::new();
    let state = orls_run_with(events, dim, params, |s, _| estimates.push(s.estimate().clone()))?;
    Ok(OrlsRun { state, estimates })
}

/// Folds [`OrlsState::step`] over `events`, streaming each new state to `observer`.
pub fn orls_run_with<'a, T: Real>(
    events: impl IntoIterator<Item = &'a MeasurementEvent<T>>,
    dim: usize,
    params: &OrlsParams<T>,
    mut observer: impl FnMut(&OrlsState<T>, &StepOutcome),
) -> Result<OrlsState<T>> {
    let mut state = orls_init(dim, params)?;
    for ev in events {
        let outcome = state.step(ev, params)?;
        observer(&state, &outcome);
    }
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct IrlsReport<T> {
    pub estimate: DenseVector<T>,
    pub outer_iterations: usize,
    /// Objective `Σ (y - a'x)² + λ‖x‖₁` at each outer iterate.
    pub objectives: Vec<T>,
}

/// Batch IRLS over all measurements; returns the final estimate.
pub fn irls_batch<T: Real>(
    rows: &[DenseVector<T>],
    y: &[T],
    dim: usize,
    params: &OrlsParams<T>,
    n_outer: usize,
) -> Result<DenseVector<T>> {
    irls_batch_report(rows, y, dim, params, n_outer).map(|r| r.estimate)
}

/// Batch IRLS: starting from `x = 0`, `W = (1/δ) I`, alternate
/// `x <- (λ W + Σ a a')^-1 Σ y a` and `W <- weight_update(x)` up to `n_outer`
/// times, leaving early when the iterate stops moving.
pub fn irls_batch_report<T: Real>(
    rows: &[DenseVector<T>],
    y: &[T],
    dim: usize,
    params: &OrlsParams<T>,
    n_outer: usize,
) -> Result<IrlsReport<T>> {
    params.validate()?;
    if dim == 0 {
        return Err(Error::Empty("solver dimension"));
    }
    if n_outer == 0 {
        return Err(Error::InvalidParameter("n_outer must be at least 1".into()));
    }
    check_dim(rows.len(), y.len())?;

    let mut gram = SymmetricMatrix::zeros(dim);
    let mut rhs = DenseVector::zeros(dim);
    for (a, &yj) in rows.iter().zip(y) {
        check_dim(dim, a.dim())?;
        if !yj.is_finite() {
            return Err(Error::NonFinite("measurement value"));
        }
        gram.add_outer(a, T::one())?;
        rhs.axpy(yj, a)?;
    }

    let mut x = DenseVector::zeros(dim);
    let mut objectives = Vec::with_capacity(n_outer);
    let mut outer_iterations = 0;
    for _ in 0..n_outer {
        let w = weight_update(&x, params.delta)?;
        let next = closed_form_solve(&gram, &rhs, &w, params.lambda)?;
        outer_iterations += 1;
        objectives.push(objective(rows, y, &next, params.lambda)?);
        let step = next.sub(&x)?.norm();
        let settled = step <= T::lit(IRLS_STEP_TOL) * (T::one() + x.norm());
        x = next;
        if settled {
            break;
        }
    }
    Ok(IrlsReport {
        estimate: x,
        outer_iterations,
        objectives,
    })
}
