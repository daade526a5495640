//! Objective assembly for the three SVM variants.
//!
//! Every variant exposes the same uniform interface — value, gradient, and
//! Lipschitz constant — so the accelerated solver is variant-agnostic:
//!
//! * C-SVM:  `F = (1/2)||w||^2 + C * sum h_mu`
//! * LP-SVM: `F = sum l_mu(w_j) + C * sum h_nu`
//! * LS-SVM: `F = (1/2)||w||^2 + C * sum (1 - y_i X_i w)^2`
//!
//! Kernel models replace the data matrix with `K(X,X) Y` and the quadratic
//! penalty with `(1/2) alpha^T K alpha`. When a bias column is present its
//! weight entry is excluded from the regularizer (value and gradient alike).

use crate::data::{Dataset, GramDataset, Kernel};
use crate::smoothing;
use std::cell::Cell;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("C must be positive, got {c}")]
    NonPositiveC { c: f64 },
    #[error("smooth parameter mu must be positive, got {mu}")]
    NonPositiveMu { mu: f64 },
    #[error("LP-SVM requires the hinge smooth parameter nu")]
    MissingNu,
    #[error("nu must be positive, got {nu}")]
    NonPositiveNu { nu: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("spec requests bias={spec} but data augmentation is {data}")]
    BiasMismatch { spec: bool, data: bool },
    #[error("kernel spec does not match the supplied data form")]
    KernelMismatch,
    #[error("operation called with the wrong variant {0:?}")]
    VariantMismatch(SvmVariant),
}

/// Which SVM formulation to train.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SvmVariant {
    CSvm,
    LpSvm,
    LsSvm,
}

/// Bound used for the summed smoothed-hinge Lipschitz constant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HingeBound {
    /// `(n/mu) * max_i ||X_i||_2^2 / ||X_i||_inf`.
    #[default]
    NMax,
    /// `(1/mu) * sum_i ||X_i||_2^2 / ||X_i||_inf`; tighter, still valid.
    RowSum,
}

/// Bound used for quadratic curvature (LS-SVM loss, kernel regularizer).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CurvatureBound {
    /// Per-row bound `max_i ||X_i||_2^2` (can under-estimate for n > 1).
    #[default]
    RowMax,
    /// `lambda_max` of the true quadratic form, via power iteration.
    Spectral,
}

/// Model selection: variant, SVM parameter, kernel, bias, smooth parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub variant: SvmVariant,
    pub c: f64,
    pub kernel: Kernel,
    pub bias: bool,
    /// Hinge smooth parameter for C-SVM; l1 smooth parameter for LP-SVM.
    pub mu: f64,
    /// Hinge smooth parameter for LP-SVM only.
    pub nu: Option<f64>,
    pub hinge_bound: HingeBound,
    pub curvature_bound: CurvatureBound,
}

impl ModelSpec {
    pub fn csvm(c: f64) -> Self {
        ModelSpec {
            variant: SvmVariant::CSvm,
            c,
            kernel: Kernel::Linear,
            bias: false,
            mu: 5.0,
            nu: None,
            hinge_bound: HingeBound::default(),
            curvature_bound: CurvatureBound::default(),
        }
    }

    pub fn lpsvm(c: f64) -> Self {
        ModelSpec {
            variant: SvmVariant::LpSvm,
            nu: Some(5.0),
            ..ModelSpec::csvm(c)
        }
    }

    pub fn lssvm(c: f64) -> Self {
        ModelSpec {
            variant: SvmVariant::LsSvm,
            ..ModelSpec::csvm(c)
        }
    }

    pub fn with_kernel(mut self, kernel: Kernel) -> Self {
        self.kernel = kernel;
        self
    }

    pub fn with_bias(mut self, bias: bool) -> Self {
        self.bias = bias;
        self
    }

    pub fn with_mu(mut self, mu: f64) -> Self {
        self.mu = mu;
        self
    }

    pub fn with_nu(mut self, nu: f64) -> Self {
        self.nu = Some(nu);
        self
    }

    pub fn with_curvature_bound(mut self, b: CurvatureBound) -> Self {
        self.curvature_bound = b;
        self
    }

    pub fn with_hinge_bound(mut self, b: HingeBound) -> Self {
        self.hinge_bound = b;
        self
    }

    /// Hinge smooth parameter actually used by the loss term (`nu` for
    /// LP-SVM, `mu` otherwise).
    pub fn hinge_mu(&self) -> f64 {
        match self.variant {
            SvmVariant::LpSvm => self.nu.unwrap_or(self.mu),
            _ => self.mu,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if self.c <= 0.0 || self.c.is_nan() {
            return Err(ModelError::NonPositiveC { c: self.c });
        }
        // LS-SVM is smooth; it ignores mu/nu.
        if self.variant != SvmVariant::LsSvm && (self.mu <= 0.0 || self.mu.is_nan()) {
            return Err(ModelError::NonPositiveMu { mu: self.mu });
        }
        if self.variant == SvmVariant::LpSvm {
            match self.nu {
                None => return Err(ModelError::MissingNu),
                Some(nu) if nu <= 0.0 || nu.is_nan() => {
                    return Err(ModelError::NonPositiveNu { nu })
                }
                _ => {}
            }
        }
        if let Kernel::Rbf { width } = self.kernel {
            if width <= 0.0 || width.is_nan() {
                return Err(ModelError::KernelMismatch);
            }
        }
        Ok(())
    }
}

/// One objective evaluation: `F_mu(w)`, its gradient, and the Lipschitz
/// constant of the gradient.
#[derive(Debug, Clone)]
pub struct ObjectiveEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub lipschitz: f64,
}

/// Training data seen by the objective: raw rows or the kernelized form.
#[derive(Debug, Clone, Copy)]
pub enum TrainData<'a> {
    Linear(&'a Dataset),
    Kernel(&'a GramDataset),
}

impl<'a> TrainData<'a> {
    pub fn n(&self) -> usize {
        match self {
            TrainData::Linear(d) => d.n(),
            TrainData::Kernel(g) => g.n(),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            TrainData::Linear(d) => d.dim(),
            TrainData::Kernel(g) => g.dim(),
        }
    }

    pub fn is_bias_augmented(&self) -> bool {
        match self {
            TrainData::Linear(d) => d.is_bias_augmented(),
            TrainData::Kernel(g) => g.is_bias_augmented(),
        }
    }

    fn row_inf_norms(&self) -> &'a [f64] {
        match self {
            TrainData::Linear(d) => d.row_inf_norms(),
            TrainData::Kernel(g) => g.row_inf_norms(),
        }
    }

    fn max_sq_over_inf(&self) -> f64 {
        match self {
            TrainData::Linear(d) => d.max_sq_over_inf(),
            TrainData::Kernel(g) => g.max_sq_over_inf(),
        }
    }

    fn sum_sq_over_inf(&self) -> f64 {
        match self {
            TrainData::Linear(d) => d.sum_sq_over_inf(),
            TrainData::Kernel(g) => g.sum_sq_over_inf(),
        }
    }

    fn max_row_sq(&self) -> f64 {
        match self {
            TrainData::Linear(d) => d.max_row_sq(),
            TrainData::Kernel(g) => g.max_row_sq(),
        }
    }

    fn margins(&self, w: &[f64]) -> Vec<f64> {
        match self {
            TrainData::Linear(d) => d.margins(w),
            TrainData::Kernel(g) => g.margins(w),
        }
    }

    fn weighted_rows(&self, coef: &[f64]) -> Vec<f64> {
        match self {
            TrainData::Linear(d) => d.weighted_rows(coef),
            TrainData::Kernel(g) => g.weighted_rows(coef),
        }
    }
}

/// Assembled smooth objective for one `(data, spec)` pair.
///
/// The Lipschitz constant is fixed at construction. Matrix-vector products
/// through the training data are counted; the accelerated solver needs
/// exactly two per iteration for the hinge-loss variants.
#[derive(Debug)]
pub struct Objective<'a> {
    data: TrainData<'a>,
    spec: ModelSpec,
    lipschitz: f64,
    matvecs: Cell<u64>,
    evals: Cell<u64>,
}

impl<'a> Objective<'a> {
    pub fn new(data: TrainData<'a>, spec: ModelSpec) -> Result<Self, ModelError> {
        spec.validate()?;
        if spec.bias != data.is_bias_augmented() {
            return Err(ModelError::BiasMismatch {
                spec: spec.bias,
                data: data.is_bias_augmented(),
            });
        }
        match (&spec.kernel, &data) {
            (Kernel::Linear, TrainData::Linear(_)) => {}
            (Kernel::Rbf { .. }, TrainData::Kernel(_)) => {}
            _ => return Err(ModelError::KernelMismatch),
        }
        let lipschitz = assemble_lipschitz(&data, &spec);
        Ok(Objective {
            data,
            spec,
            lipschitz,
            matvecs: Cell::new(0),
            evals: Cell::new(0),
        })
    }

    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }

    pub fn data(&self) -> TrainData<'a> {
        self.data
    }

    pub fn dim(&self) -> usize {
        self.data.dim()
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    /// Matrix-vector products through the training data so far.
    pub fn matvec_count(&self) -> u64 {
        self.matvecs.get()
    }

    /// Full (value + gradient) evaluations so far.
    pub fn eval_count(&self) -> u64 {
        self.evals.get()
    }

    fn bump(&self) {
        self.matvecs.set(self.matvecs.get() + 1);
    }

    fn counted_margins(&self, w: &[f64]) -> Vec<f64> {
        self.bump();
        self.data.margins(w)
    }

    fn counted_weighted_rows(&self, coef: &[f64]) -> Vec<f64> {
        self.bump();
        self.data.weighted_rows(coef)
    }

    fn counted_kernel_times(&self, g: &GramDataset, w: &[f64]) -> Vec<f64> {
        self.bump();
        g.kernel_times(w)
    }

    /// Regularizer value and gradient for the quadratic-penalty variants.
    fn quad_reg(&self, w: &[f64]) -> (f64, Vec<f64>) {
        match self.data {
            TrainData::Linear(_) => {
                let reg_len = if self.spec.bias { w.len() - 1 } else { w.len() };
                let value = 0.5 * w[..reg_len].iter().map(|v| v * v).sum::<f64>();
                let mut grad = w.to_vec();
                if self.spec.bias {
                    grad[reg_len] = 0.0;
                }
                (value, grad)
            }
            TrainData::Kernel(g) => {
                let ka = self.counted_kernel_times(g, w);
                let value = 0.5 * w[..g.n()].iter().zip(&ka).map(|(a, b)| a * b).sum::<f64>();
                let mut grad = ka;
                if self.spec.bias {
                    grad.push(0.0);
                }
                (value, grad)
            }
        }
    }

    fn quad_reg_value(&self, w: &[f64]) -> f64 {
        match self.data {
            TrainData::Linear(_) => {
                let reg_len = if self.spec.bias { w.len() - 1 } else { w.len() };
                0.5 * w[..reg_len].iter().map(|v| v * v).sum::<f64>()
            }
            TrainData::Kernel(g) => {
                let ka = self.counted_kernel_times(g, w);
                0.5 * w[..g.n()].iter().zip(&ka).map(|(a, b)| a * b).sum::<f64>()
            }
        }
    }

    fn check_dim(&self, w: &[f64]) -> Result<(), ModelError> {
        if w.len() != self.data.dim() {
            return Err(ModelError::DimensionMismatch {
                expected: self.data.dim(),
                got: w.len(),
            });
        }
        Ok(())
    }

    /// Evaluates `F_mu`, its gradient, and returns the assembled Lipschitz
    /// constant.
    pub fn eval(&self, w: &[f64]) -> Result<ObjectiveEval, ModelError> {
        self.check_dim(w)?;
        self.evals.set(self.evals.get() + 1);
        let c = self.spec.c;
        let inf_norms = self.data.row_inf_norms();
        let (value, gradient) = match self.spec.variant {
            SvmVariant::CSvm => {
                let m = self.counted_margins(w);
                let u = smoothing::hinge_dual_from_margins(&m, inf_norms, self.spec.mu);
                let loss = smoothing::hinge_value_from_margins(&m, inf_norms, self.spec.mu, &u);
                let (reg, mut grad) = self.quad_reg(w);
                let pulled = self.counted_weighted_rows(&u);
                for (g, &v) in grad.iter_mut().zip(&pulled) {
                    *g -= c * v;
                }
                (reg + c * loss, grad)
            }
            SvmVariant::LpSvm => {
                let nu = self.spec.nu.expect("validated");
                let m = self.counted_margins(w);
                let v = smoothing::hinge_dual_from_margins(&m, inf_norms, nu);
                let loss = smoothing::hinge_value_from_margins(&m, inf_norms, nu, &v);
                let reg_len = if self.spec.bias { w.len() - 1 } else { w.len() };
                let reg = smoothing::l1_value(&w[..reg_len], self.spec.mu);
                let mut grad = smoothing::l1_gradient(&w[..reg_len], self.spec.mu);
                grad.resize(w.len(), 0.0);
                let pulled = self.counted_weighted_rows(&v);
                for (g, &pv) in grad.iter_mut().zip(&pulled) {
                    *g -= c * pv;
                }
                (reg + c * loss, grad)
            }
            SvmVariant::LsSvm => {
                let m = self.counted_margins(w);
                let residual: Vec<f64> = m.iter().map(|&mi| 1.0 - mi).collect();
                let loss: f64 = residual.iter().map(|r| r * r).sum();
                let (reg, mut grad) = self.quad_reg(w);
                let pulled = self.counted_weighted_rows(&residual);
                for (g, &v) in grad.iter_mut().zip(&pulled) {
                    *g -= 2.0 * c * v;
                }
                (reg + c * loss, grad)
            }
        };
        Ok(ObjectiveEval {
            value,
            gradient,
            lipschitz: self.lipschitz,
        })
    }

    /// Objective value only (used for traces; cheaper than [`Objective::eval`]).
    pub fn value(&self, w: &[f64]) -> Result<f64, ModelError> {
        self.check_dim(w)?;
        let c = self.spec.c;
        let inf_norms = self.data.row_inf_norms();
        let m = self.counted_margins(w);
        let value = match self.spec.variant {
            SvmVariant::CSvm => {
                let u = smoothing::hinge_dual_from_margins(&m, inf_norms, self.spec.mu);
                self.quad_reg_value(w)
                    + c * smoothing::hinge_value_from_margins(&m, inf_norms, self.spec.mu, &u)
            }
            SvmVariant::LpSvm => {
                let nu = self.spec.nu.expect("validated");
                let v = smoothing::hinge_dual_from_margins(&m, inf_norms, nu);
                let reg_len = if self.spec.bias { w.len() - 1 } else { w.len() };
                smoothing::l1_value(&w[..reg_len], self.spec.mu)
                    + c * smoothing::hinge_value_from_margins(&m, inf_norms, nu, &v)
            }
            SvmVariant::LsSvm => {
                let loss: f64 = m.iter().map(|&mi| (1.0 - mi) * (1.0 - mi)).sum();
                self.quad_reg_value(w) + c * loss
            }
        };
        Ok(value)
    }
}

fn assemble_lipschitz(data: &TrainData, spec: &ModelSpec) -> f64 {
    let n = data.n() as f64;
    let hinge_part = |mu: f64| match spec.hinge_bound {
        HingeBound::NMax => (n / mu) * data.max_sq_over_inf(),
        HingeBound::RowSum => data.sum_sq_over_inf() / mu,
    };
    let quad_reg_curvature = || match data {
        TrainData::Linear(_) => 1.0,
        TrainData::Kernel(g) => match spec.curvature_bound {
            // lambda_max(K) <= max abs row sum for symmetric K.
            CurvatureBound::RowMax => (0..g.n())
                .map(|i| (0..g.n()).map(|j| g.kernel_entry(i, j).abs()).sum::<f64>())
                .fold(0.0, f64::max),
            CurvatureBound::Spectral => {
                spectral_safety(power_iteration(g.n(), |v| g.kernel_times_raw(v)))
            }
        },
    };
    match spec.variant {
        SvmVariant::CSvm => quad_reg_curvature() + spec.c * hinge_part(spec.mu),
        SvmVariant::LpSvm => 1.0 / spec.mu + spec.c * hinge_part(spec.nu.expect("validated")),
        SvmVariant::LsSvm => {
            let curvature = match spec.curvature_bound {
                CurvatureBound::RowMax => data.max_row_sq(),
                // Loss Hessian is 2C R^T R over the effective rows (the
                // label signs square away), so power-iterate v -> R^T(Rv).
                CurvatureBound::Spectral => {
                    spectral_safety(power_iteration(data.dim(), |v| match data {
                        TrainData::Linear(d) => d.rows_transpose_times(&d.rows_times(v)),
                        TrainData::Kernel(g) => g.rows_transpose_times(&g.rows_times(v)),
                    }))
                }
            };
            quad_reg_curvature() + 2.0 * spec.c * curvature
        }
    }
}

/// Inflates a power-iteration eigenvalue estimate slightly: the iteration
/// converges from below and the solver needs an upper bound.
fn spectral_safety(lambda: f64) -> f64 {
    lambda * (1.0 + 1e-8)
}

/// Largest eigenvalue of a symmetric PSD operator by power iteration.
fn power_iteration(dim: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    // Deterministic start with a mild index ramp to avoid orthogonality.
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + (i as f64) * 1e-3).collect();
    let norm = |x: &[f64]| x.iter().map(|a| a * a).sum::<f64>().sqrt();
    let nv = norm(&v);
    for x in &mut v {
        *x /= nv;
    }
    let mut lambda = 0.0f64;
    for _ in 0..5000 {
        let av = apply(&v);
        let new_lambda = v.iter().zip(&av).map(|(a, b)| a * b).sum::<f64>();
        let an = norm(&av);
        if an == 0.0 {
            return 0.0;
        }
        v = av.iter().map(|a| a / an).collect();
        if (new_lambda - lambda).abs() <= 1e-12 * new_lambda.abs().max(1.0) {
            return new_lambda;
        }
        lambda = new_lambda;
    }
    lambda
}

/// `F_mu` and gradient for a C-SVM spec on linear data.
pub fn eval_csvm(d: &Dataset, w: &[f64], spec: &ModelSpec) -> Result<ObjectiveEval, ModelError> {
    if spec.variant != SvmVariant::CSvm {
        return Err(ModelError::VariantMismatch(spec.variant));
    }
    Objective::new(TrainData::Linear(d), spec.clone())?.eval(w)
}

/// `F_mu` and gradient for an LP-SVM spec on linear data.
pub fn eval_lpsvm(d: &Dataset, w: &[f64], spec: &ModelSpec) -> Result<ObjectiveEval, ModelError> {
    if spec.variant != SvmVariant::LpSvm {
        return Err(ModelError::VariantMismatch(spec.variant));
    }
    Objective::new(TrainData::Linear(d), spec.clone())?.eval(w)
}

/// `F` and gradient for an LS-SVM spec on linear data.
pub fn eval_lssvm(d: &Dataset, w: &[f64], spec: &ModelSpec) -> Result<ObjectiveEval, ModelError> {
    if spec.variant != SvmVariant::LsSvm {
        return Err(ModelError::VariantMismatch(spec.variant));
    }
    Objective::new(TrainData::Linear(d), spec.clone())?.eval(w)
}

/// Kernelized evaluation: same assembly with the effective matrix
/// `K(X,X) Y` and penalty `(1/2) alpha^T K alpha`.
pub fn kernelize(
    spec: &ModelSpec,
    g: &GramDataset,
    alpha: &[f64],
) -> Result<ObjectiveEval, ModelError> {
    Objective::new(TrainData::Kernel(g), spec.clone())?.eval(alpha)
}
