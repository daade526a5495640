//! Machine-readable run reports with a stable key order.

use psvm::solver::StageSummary;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct ModelEcho {
    pub variant: String,
    pub c: f64,
    pub kernel: String,
    pub rbf_width: Option<f64>,
    pub bias: bool,
    pub mu: f64,
    pub nu: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SolverEcho {
    pub epsilon: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub homotopy: Option<HomotopyEcho>,
    pub strict_lipschitz: bool,
    pub scaling: String,
}

#[derive(Debug, Serialize)]
pub struct HomotopyEcho {
    pub mu0: f64,
    pub mu_star: f64,
}

#[derive(Debug, Serialize)]
pub struct StageEcho {
    pub mu: f64,
    pub nu: Option<f64>,
    pub iterations: usize,
    pub final_objective: f64,
    pub converged: bool,
}

/// One training run, serialized with struct-declaration key order.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub model: ModelEcho,
    pub solver: SolverEcho,
    pub wall_time_seconds: f64,
    pub iterations: usize,
    pub matvecs: u64,
    pub final_objective: f64,
    pub converged: bool,
    pub accuracy: Option<f64>,
    pub stages: Vec<StageEcho>,
}

impl RunReport {
    pub fn stages_from(stages: &[StageSummary]) -> Vec<StageEcho> {
        stages
            .iter()
            .map(|s| StageEcho {
                mu: s.mu,
                nu: s.nu,
                iterations: s.iterations,
                final_objective: s.final_objective,
                converged: s.converged,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}
