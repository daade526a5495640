//! High-level training entry points.
//!
//! These wrap objective assembly and the accelerated solver, handling bias
//! augmentation and Gram construction so callers hand over raw data plus a
//! [`ModelSpec`] and get a [`TrainedModel`] back.

use crate::data::{DataError, Dataset, GramDataset, Kernel};
use crate::models::{ModelError, ModelSpec, Objective, TrainData};
use crate::solver::{
    solve, solve_homotopy, HomotopyConfig, SolverConfig, SolverError, TrainedModel,
};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Solver(#[from] SolverError),
}

enum Prepared<'a> {
    Linear(&'a Dataset),
    LinearOwned(Dataset),
    Kernel(GramDataset),
}

impl Prepared<'_> {
    fn view(&self) -> TrainData<'_> {
        match self {
            Prepared::Linear(d) => TrainData::Linear(d),
            Prepared::LinearOwned(d) => TrainData::Linear(d),
            Prepared::Kernel(g) => TrainData::Kernel(g),
        }
    }
}

fn prepare<'a>(d: &'a Dataset, spec: &ModelSpec) -> Result<Prepared<'a>, TrainError> {
    spec.validate()?;
    Ok(match spec.kernel {
        Kernel::Linear => {
            if spec.bias && !d.is_bias_augmented() {
                Prepared::LinearOwned(d.augment_bias())
            } else {
                Prepared::Linear(d)
            }
        }
        Kernel::Rbf { width } => {
            let gram = GramDataset::rbf(d, width)?;
            if spec.bias {
                Prepared::Kernel(gram.augment_bias())
            } else {
                Prepared::Kernel(gram)
            }
        }
    })
}

/// Trains one model with the accelerated solver.
pub fn train(
    d: &Dataset,
    spec: &ModelSpec,
    config: &SolverConfig,
) -> Result<TrainedModel, TrainError> {
    let prepared = prepare(d, spec)?;
    let obj = Objective::new(prepared.view(), spec.clone())?;
    Ok(solve(&obj, config)?)
}

/// Trains on an already-built Gram dataset (kernel variants).
pub fn train_gram(
    g: &GramDataset,
    spec: &ModelSpec,
    config: &SolverConfig,
) -> Result<TrainedModel, TrainError> {
    if spec.bias && !g.is_bias_augmented() {
        let aug = g.augment_bias();
        let obj = Objective::new(TrainData::Kernel(&aug), spec.clone())?;
        return Ok(solve(&obj, config)?);
    }
    let obj = Objective::new(TrainData::Kernel(g), spec.clone())?;
    Ok(solve(&obj, config)?)
}

/// Trains with homotopy continuation on the smooth parameter.
pub fn train_homotopy(
    d: &Dataset,
    spec: &ModelSpec,
    config: &SolverConfig,
    homotopy: &HomotopyConfig,
) -> Result<TrainedModel, TrainError> {
    let prepared = prepare(d, spec)?;
    Ok(solve_homotopy(prepared.view(), spec, config, homotopy)?)
}
