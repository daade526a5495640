//! Primal support-vector-machine solvers built on smoothing and an
//! accelerated first-order method.
//!
//! The non-differentiable pieces of the primal objectives — the hinge loss
//! and the l1-norm — are replaced by smooth saddle-point surrogates whose
//! duals, gradients, and Lipschitz constants have closed forms. A
//! line-search-free accelerated gradient loop then drives the smoothed
//! objective, combining the current gradient with a weighted history of
//! past gradients; each iteration costs two matrix-vector products. A
//! homotopy driver re-solves with a shrinking smooth parameter, warm
//! starting each stage, when a tight approximation is wanted.
//!
//! Three variants share the solver through one objective interface:
//! l2-regularized hinge loss (C-SVM), l1-regularized hinge loss (LP-SVM),
//! and l2-regularized squared loss (LS-SVM), each linear or RBF-kernelized,
//! with an optional unpenalized bias.
//!
//! The [`oracle`] module carries independent verification tools (finite
//! differences, brute-force saddle maximization, a normal-equation LS-SVM
//! solve, and a subgradient reference minimizer); [`io`] reads the
//! LIBSVM/SVM-Light text format.

pub mod data;
pub mod io;
pub mod models;
pub mod oracle;
pub mod predict;
pub mod smoothing;
pub mod solver;
pub mod synth;
pub mod train;

pub use data::{DataError, Dataset, GramDataset, Kernel};
pub use models::{
    eval_csvm, eval_lpsvm, eval_lssvm, kernelize, CurvatureBound, HingeBound, ModelError,
    ModelSpec, Objective, ObjectiveEval, SvmVariant, TrainData,
};
pub use predict::{PredictError, Predictor};
pub use solver::{
    homotopy_schedule, solve, solve_homotopy, HomotopyConfig, SolverConfig, SolverError,
    StageSummary, TrainedModel,
};
pub use train::{train, train_gram, train_homotopy, TrainError};
