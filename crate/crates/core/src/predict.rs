//! Decision functions for trained models.
//!
//! Linear models score `x . w (+ b)`; kernel models use the expansion
//! `sum_i alpha_i y_i K(X_i, x) (+ b)` over the training samples. The
//! classification rule is `sign`, with ties (a decision value of exactly
//! zero) mapped to `+1`.

use crate::data::Dataset;
use crate::solver::TrainedModel;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PredictError {
    #[error("dimension mismatch: predictor expects {expected} features, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("trained weight length {got} does not match its training data ({expected})")]
    InconsistentModel { expected: usize, got: usize },
}

/// A self-contained scorer detached from the training data.
#[derive(Debug, Clone, PartialEq)]
pub enum Predictor {
    Linear {
        /// Weights; the trailing entry is the bias when `bias` is set.
        w: Vec<f64>,
        bias: bool,
    },
    Rbf {
        /// Per-sample coefficients; trailing bias entry when `bias` is set.
        alpha: Vec<f64>,
        bias: bool,
        width: f64,
        /// Support samples, row-major `n x p`.
        support: Vec<f64>,
        labels: Vec<f64>,
        n: usize,
        p: usize,
    },
}

impl Predictor {
    /// Builds a predictor from a trained model. Kernel models capture the
    /// training samples; `train_data` must be the same (unaugmented)
    /// dataset the model was trained on.
    pub fn from_trained(
        model: &TrainedModel,
        train_data: &Dataset,
    ) -> Result<Predictor, PredictError> {
        let bias = model.spec.bias;
        match model.spec.kernel {
            crate::data::Kernel::Linear => Ok(Predictor::Linear {
                w: model.w.clone(),
                bias,
            }),
            crate::data::Kernel::Rbf { width } => {
                let expected = train_data.n() + usize::from(bias);
                if model.w.len() != expected {
                    return Err(PredictError::InconsistentModel {
                        expected,
                        got: model.w.len(),
                    });
                }
                let n = train_data.n();
                let p = train_data.dim();
                let mut support = Vec::with_capacity(n * p);
                for i in 0..n {
                    support.extend_from_slice(train_data.row(i));
                }
                Ok(Predictor::Rbf {
                    alpha: model.w.clone(),
                    bias,
                    width,
                    support,
                    labels: train_data.labels().to_vec(),
                    n,
                    p,
                })
            }
        }
    }

    /// Feature dimension the predictor expects.
    pub fn input_dim(&self) -> usize {
        match self {
            Predictor::Linear { w, bias } => w.len() - usize::from(*bias),
            Predictor::Rbf { p, .. } => *p,
        }
    }

    /// Raw decision value for one sample.
    pub fn decision(&self, x: &[f64]) -> Result<f64, PredictError> {
        if x.len() != self.input_dim() {
            return Err(PredictError::DimensionMismatch {
                expected: self.input_dim(),
                got: x.len(),
            });
        }
        Ok(match self {
            Predictor::Linear { w, bias } => {
                let p = w.len() - usize::from(*bias);
                let mut v: f64 = w[..p].iter().zip(x).map(|(a, b)| a * b).sum();
                if *bias {
                    v += w[p];
                }
                v
            }
            Predictor::Rbf {
                alpha,
                bias,
                width,
                support,
                labels,
                n,
                p,
            } => {
                let mut v = 0.0;
                for i in 0..*n {
                    let row = &support[i * p..(i + 1) * p];
                    let dist_sq: f64 = row.iter().zip(x).map(|(a, b)| (a - b) * (a - b)).sum();
                    v += alpha[i] * labels[i] * (-dist_sq / width).exp();
                }
                if *bias {
                    v += alpha[*n];
                }
                v
            }
        })
    }

    /// Class prediction in `{-1, +1}`; a decision value of exactly zero
    /// maps to `+1`.
    pub fn classify(&self, x: &[f64]) -> Result<f64, PredictError> {
        Ok(if self.decision(x)? >= 0.0 { 1.0 } else { -1.0 })
    }

    /// Fraction of rows whose prediction matches `labels`.
    pub fn accuracy(&self, rows: &[Vec<f64>], labels: &[f64]) -> Result<f64, PredictError> {
        assert_eq!(rows.len(), labels.len());
        let mut hits = 0usize;
        for (row, &label) in rows.iter().zip(labels) {
            if self.classify(row)? == label {
                hits += 1;
            }
        }
        Ok(hits as f64 / rows.len().max(1) as f64)
    }

    /// Accuracy over a dataset's own rows and labels.
    pub fn accuracy_on(&self, d: &Dataset) -> Result<f64, PredictError> {
        let mut hits = 0usize;
        for i in 0..d.n() {
            if self.classify(d.row(i))? == d.labels()[i] {
                hits += 1;
            }
        }
        Ok(hits as f64 / d.n() as f64)
    }
}
