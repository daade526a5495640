//! Accelerated first-order solver and homotopy continuation driver.
//!
//! Each iteration builds two auxiliary solutions from the current gradient
//! and the running weighted sum of all historical gradients:
//!
//! ```text
//! y_k = w_k - grad / L
//! z_k = w_star - (1 / L) * sum_{i=0..k} (i+1)/2 * grad_i
//! w_{k+1} = 2/(k+3) * z_k + (k+1)/(k+3) * y_k
//! ```
//!
//! The step size is fixed by the Lipschitz constant; there is no line
//! search. The loop stops when successive objective values differ by less
//! than `epsilon`, which costs nothing extra because the objective at the
//! new iterate is produced by the next iteration's own evaluation.
//!
//! The homotopy driver solves a sequence of problems with the smooth
//! parameter shrinking as `mu_t = mu0 / (t + 1)`, warm-starting each stage
//! from the previous stage's solution, until `mu_t <= mu_star`.

use crate::models::{ModelError, ModelSpec, Objective, ObjectiveEval, TrainData};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error(
        "non-finite iterate at iteration {iteration}; the Lipschitz constant is likely too small"
    )]
    NonFiniteIterate { iteration: usize },
    #[error("epsilon must be positive, got {epsilon}")]
    NonPositiveEpsilon { epsilon: f64 },
    #[error("max_iter must be at least 1")]
    ZeroMaxIter,
    #[error("initial vector length {got} does not match problem dimension {expected}")]
    BadInitialVector { expected: usize, got: usize },
    #[error("homotopy schedule requires mu0 >= mu_star > 0, got mu0={mu0}, mu_star={mu_star}")]
    BadSchedule { mu0: f64, mu_star: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Stopping rule, iteration cap, start / prox-center vectors, tracing.
#[derive(Debug, Clone)]
pub struct SolverConfig {
    /// Tolerance on `|F(w_{k+1}) - F(w_k)|`.
    pub epsilon: f64,
    /// Hard iteration cap; hitting it yields `converged = false`.
    pub max_iter: usize,
    /// Initial solution; zeros when absent.
    pub w0: Option<Vec<f64>>,
    /// Prox-center ("guess solution") for the historical-gradient step;
    /// zeros when absent.
    pub w_star: Option<Vec<f64>>,
    /// Record objective traces (adds one matrix-vector product per
    /// iteration for the auxiliary-solution objective).
    pub record_history: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: 1e-3,
            max_iter: 100_000,
            w0: None,
            w_star: None,
            record_history: false,
        }
    }
}

impl SolverConfig {
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn with_history(mut self) -> Self {
        self.record_history = true;
        self
    }

    fn validate(&self) -> Result<(), SolverError> {
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(SolverError::NonPositiveEpsilon {
                epsilon: self.epsilon,
            });
        }
        if self.max_iter == 0 {
            return Err(SolverError::ZeroMaxIter);
        }
        Ok(())
    }
}

/// Mutable state of one accelerated run.
#[derive(Debug, Clone)]
pub struct SolverState {
    pub k: usize,
    pub w: Vec<f64>,
    pub y: Vec<f64>,
    pub z: Vec<f64>,
    /// Running `sum_{i=0..k} (i+1)/2 * grad_i`.
    pub grad_accum: Vec<f64>,
}

impl SolverState {
    pub fn new(w0: Vec<f64>) -> Self {
        let dim = w0.len();
        SolverState {
            k: 0,
            w: w0,
            y: vec![0.0; dim],
            z: vec![0.0; dim],
            grad_accum: vec![0.0; dim],
        }
    }
}

/// One accelerated update from the evaluation at the current iterate.
///
/// Advances `state` in place: computes both auxiliary solutions, forms
/// their convex combination as the next iterate, and increments `k`.
pub fn nesterov_step(
    state: &mut SolverState,
    eval: &ObjectiveEval,
    w_star: &[f64],
) -> Result<(), SolverError> {
    let l = eval.lipschitz;
    let k = state.k;
    let weight = (k as f64 + 1.0) / 2.0;
    for (i, &g) in eval.gradient.iter().enumerate() {
        state.y[i] = state.w[i] - g / l;
        state.grad_accum[i] += weight * g;
        state.z[i] = w_star[i] - state.grad_accum[i] / l;
    }
    let cz = 2.0 / (k as f64 + 3.0);
    let cy = (k as f64 + 1.0) / (k as f64 + 3.0);
    for (w, (&z, &y)) in state.w.iter_mut().zip(state.z.iter().zip(&state.y)) {
        *w = cz * z + cy * y;
    }
    if !state.w.iter().all(|v| v.is_finite()) {
        return Err(SolverError::NonFiniteIterate { iteration: k });
    }
    state.k = k + 1;
    Ok(())
}

/// Objective traces recorded during a history-enabled run.
#[derive(Debug, Clone, Default)]
pub struct Trace {
    /// `F(w_k)` for k = 0 ..= iterations.
    pub f_w: Vec<f64>,
    /// `F(y_k)` for k = 0 .. iterations.
    pub f_y: Vec<f64>,
    /// Iterates `w_k` for k = 0 .. iterations (the points where gradients
    /// were taken).
    pub w_iterates: Vec<Vec<f64>>,
    /// Final gradient accumulator, for replay checks.
    pub grad_accum: Vec<f64>,
}

/// Result of one (possibly staged) solver run.
#[derive(Debug, Clone)]
pub struct TrainedModel {
    /// Final weight vector (bias last when the data was bias-augmented).
    pub w: Vec<f64>,
    pub spec: ModelSpec,
    /// Number of accelerated updates performed.
    pub iterations: usize,
    /// Full objective evaluations (one per iteration plus the final
    /// convergence check).
    pub evals: u64,
    /// Matrix-vector products through the training data.
    pub matvecs: u64,
    pub final_objective: f64,
    pub converged: bool,
    pub trace: Option<Trace>,
    /// Per-stage summaries when run under homotopy continuation.
    pub stages: Vec<StageSummary>,
}

/// One homotopy stage: the smooth parameters used and what the stage did.
#[derive(Debug, Clone)]
pub struct StageSummary {
    pub mu: f64,
    pub nu: Option<f64>,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
}

/// Minimizes the assembled objective with the accelerated loop.
pub fn solve(obj: &Objective, config: &SolverConfig) -> Result<TrainedModel, SolverError> {
    config.validate()?;
    let dim = obj.dim();
    let w0 = match &config.w0 {
        Some(w) => {
            if w.len() != dim {
                return Err(SolverError::BadInitialVector {
                    expected: dim,
                    got: w.len(),
                });
            }
            w.clone()
        }
        None => vec![0.0; dim],
    };
    let w_star = match &config.w_star {
        Some(w) => {
            if w.len() != dim {
                return Err(SolverError::BadInitialVector {
                    expected: dim,
                    got: w.len(),
                });
            }
            w.clone()
        }
        None => vec![0.0; dim],
    };

    let mut state = SolverState::new(w0);
    let mut trace = config.record_history.then(Trace::default);
    let mut prev_value: Option<f64> = None;
    let mut converged = false;
    let final_value;

    loop {
        let eval = obj.eval(&state.w)?;
        if !eval.value.is_finite() {
            return Err(SolverError::NonFiniteIterate { iteration: state.k });
        }
        if let Some(t) = trace.as_mut() {
            t.f_w.push(eval.value);
        }
        if let Some(prev) = prev_value {
            if (eval.value - prev).abs() < config.epsilon {
                converged = true;
                final_value = eval.value;
                break;
            }
        }
        if state.k == config.max_iter {
            final_value = eval.value;
            break;
        }
        if let Some(t) = trace.as_mut() {
            t.w_iterates.push(state.w.clone());
        }
        prev_value = Some(eval.value);
        nesterov_step(&mut state, &eval, &w_star)?;
        if let Some(t) = trace.as_mut() {
            t.f_y.push(obj.value(&state.y)?);
        }
    }

    if let Some(t) = trace.as_mut() {
        t.grad_accum = state.grad_accum.clone();
    }
    Ok(TrainedModel {
        w: state.w,
        spec: obj.spec().clone(),
        iterations: state.k,
        evals: obj.eval_count(),
        matvecs: obj.matvec_count(),
        final_objective: final_value,
        converged,
        trace,
        stages: Vec::new(),
    })
}

/// The smooth-parameter schedule `mu0 / (t+1)`, truncated at the first
/// value `<= mu_star` (inclusive).
pub fn homotopy_schedule(mu0: f64, mu_star: f64) -> Result<Vec<f64>, SolverError> {
    if mu_star <= 0.0 || mu_star.is_nan() || mu0 < mu_star || mu0.is_nan() {
        return Err(SolverError::BadSchedule { mu0, mu_star });
    }
    let mut stages = Vec::new();
    for t in 0.. {
        let mu = mu0 / (t as f64 + 1.0);
        stages.push(mu);
        if mu <= mu_star {
            break;
        }
    }
    Ok(stages)
}

/// Homotopy continuation settings.
#[derive(Debug, Clone)]
pub struct HomotopyConfig {
    pub mu0: f64,
    pub mu_star: f64,
    /// Stages before the last run at `relax_factor * epsilon`; the last
    /// stage runs at `epsilon` itself.
    pub relax_factor: f64,
}

impl HomotopyConfig {
    pub fn new(mu0: f64, mu_star: f64) -> Self {
        HomotopyConfig {
            mu0,
            mu_star,
            relax_factor: 10.0,
        }
    }
}

/// Runs the staged solver: each stage solves at `mu_t = mu0 / (t+1)`
/// (LP-SVM's `nu` follows the same schedule from its own initial value),
/// warm-starting from the previous stage's solution. The Lipschitz
/// constant is reassembled at every stage.
pub fn solve_homotopy(
    data: TrainData,
    spec: &ModelSpec,
    config: &SolverConfig,
    homotopy: &HomotopyConfig,
) -> Result<TrainedModel, SolverError> {
    config.validate()?;
    let schedule = homotopy_schedule(homotopy.mu0, homotopy.mu_star)?;
    let nu0 = spec.nu;
    let mut stage_config = config.clone();
    let mut stages = Vec::with_capacity(schedule.len());
    let mut model: Option<TrainedModel> = None;
    let mut total_iterations = 0usize;
    let mut total_evals = 0u64;
    let mut total_matvecs = 0u64;

    for (t, &mu) in schedule.iter().enumerate() {
        let mut stage_spec = spec.clone();
        stage_spec.mu = mu;
        if let Some(nu0) = nu0 {
            stage_spec.nu = Some(nu0 / (t as f64 + 1.0));
        }
        let last = t + 1 == schedule.len();
        stage_config.epsilon = if last {
            config.epsilon
        } else {
            config.epsilon * homotopy.relax_factor
        };
        // Warm start from the previous stage's solution; the prox-center
        // follows it so the historical-gradient step continues from the
        // warm start rather than dragging iterates back to the original
        // guess.
        stage_config.w0 = model.as_ref().map(|m| m.w.clone()).or(config.w0.clone());
        stage_config.w_star = stage_config.w0.clone().or(config.w_star.clone());

        let obj = Objective::new(data, stage_spec.clone())?;
        let stage_model = solve(&obj, &stage_config)?;
        total_iterations += stage_model.iterations;
        total_evals += stage_model.evals;
        total_matvecs += stage_model.matvecs;
        stages.push(StageSummary {
            mu,
            nu: stage_spec.nu,
            iterations: stage_model.iterations,
            final_objective: stage_model.final_objective,
            converged: stage_model.converged,
        });
        model = Some(stage_model);
    }

    let mut model = model.expect("schedule is never empty");
    model.iterations = total_iterations;
    model.evals = total_evals;
    model.matvecs = total_matvecs;
    model.stages = stages;
    Ok(model)
}
