//! Benchmark sweeps over the SVM parameter and training-set size.
//!
//! Each (size, C) cell trains `repeats` times on a seed-pinned subsample
//! and reports mean/std wall time plus the (deterministic) iteration count
//! and training accuracy. Cells run in parallel across worker threads and
//! are merged back in cell order, so everything except the time columns is
//! reproducible bit for bit.

use crate::model_file::g17;
use psvm::io::SvmLightRecord;
use psvm::models::ModelSpec;
use psvm::oracle;
use psvm::predict::Predictor;
use psvm::solver::SolverConfig;
use psvm::Dataset;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Mutex;
use std::time::Instant;

pub struct SweepPlan {
    pub c_grid: Vec<f64>,
    pub sizes: Vec<usize>,
    pub repeats: usize,
    pub seed: u64,
    /// Run the plain subgradient baseline instead of the accelerated
    /// solver; `baseline_iters` is its fixed iteration budget.
    pub baseline: bool,
    pub baseline_iters: usize,
}

/// The default log grid: 10^-3 .. 10^3.
pub fn default_c_grid() -> Vec<f64> {
    vec![1e-3, 1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3]
}

#[derive(Debug, Clone)]
pub struct CellResult {
    pub c: f64,
    pub n: usize,
    pub mean_time: f64,
    pub std_time: f64,
    pub mean_iters: f64,
    pub accuracy: f64,
}

fn subsample(records: &[SvmLightRecord], size: usize, seed: u64) -> Vec<SvmLightRecord> {
    if size >= records.len() {
        return records.to_vec();
    }
    let mut idx: Vec<usize> = (0..records.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    idx.shuffle(&mut rng);
    idx.truncate(size);
    idx.sort_unstable();
    idx.into_iter().map(|i| records[i].clone()).collect()
}

fn run_cell(
    d: &Dataset,
    spec: &ModelSpec,
    config: &SolverConfig,
    plan: &SweepPlan,
) -> Result<CellResult, String> {
    let mut times = Vec::with_capacity(plan.repeats);
    let mut iters = 0f64;
    let mut accuracy = 0f64;
    for rep in 0..plan.repeats {
        let t0 = Instant::now();
        let (w, its) = if plan.baseline {
            let w = oracle::subgradient_reference(d, spec, plan.baseline_iters)
                .map_err(|e| e.to_string())?;
            (w, plan.baseline_iters)
        } else {
            let model = psvm::train(d, spec, config).map_err(|e| e.to_string())?;
            let its = model.iterations;
            (model.w, its)
        };
        times.push(t0.elapsed().as_secs_f64());
        if rep == 0 {
            iters = its as f64;
            let model = psvm::TrainedModel {
                w,
                spec: spec.clone(),
                iterations: its,
                evals: 0,
                matvecs: 0,
                final_objective: 0.0,
                converged: true,
                trace: None,
                stages: Vec::new(),
            };
            let predictor = Predictor::from_trained(&model, d).map_err(|e| e.to_string())?;
            accuracy = predictor.accuracy_on(d).map_err(|e| e.to_string())?;
        }
    }
    let mean = times.iter().sum::<f64>() / times.len() as f64;
    let var = times.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / times.len() as f64;
    Ok(CellResult {
        c: spec.c,
        n: d.n(),
        mean_time: mean,
        std_time: var.sqrt(),
        mean_iters: iters,
        accuracy,
    })
}

pub fn run_sweep(
    records: &[SvmLightRecord],
    base_spec: &ModelSpec,
    config: &SolverConfig,
    plan: &SweepPlan,
    to_dataset: impl Fn(&[SvmLightRecord]) -> Result<Dataset, String> + Sync,
) -> Result<Vec<CellResult>, String> {
    if plan.c_grid.is_empty() || plan.sizes.is_empty() {
        return Err("sweep grids must be non-empty".into());
    }
    // One dataset per size, shared read-only by that size's cells.
    let mut datasets = Vec::with_capacity(plan.sizes.len());
    for (k, &size) in plan.sizes.iter().enumerate() {
        let sub = subsample(records, size, plan.seed.wrapping_add(k as u64));
        datasets.push(to_dataset(&sub)?);
    }

    let cells: Vec<(usize, usize)> = (0..plan.sizes.len())
        .flat_map(|s| (0..plan.c_grid.len()).map(move |c| (s, c)))
        .collect();
    let results: Mutex<Vec<Option<Result<CellResult, String>>>> =
        Mutex::new(vec![None; cells.len()]);
    let workers = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1)
        .min(cells.len());

    std::thread::scope(|scope| {
        for worker in 0..workers {
            let cells = &cells;
            let datasets = &datasets;
            let results = &results;
            scope.spawn(move || {
                for cell_idx in (worker..cells.len()).step_by(workers) {
                    let (s, c) = cells[cell_idx];
                    let mut spec = base_spec.clone();
                    spec.c = plan.c_grid[c];
                    let outcome = run_cell(&datasets[s], &spec, config, plan);
                    results.lock().unwrap()[cell_idx] = Some(outcome);
                }
            });
        }
    });

    results
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|r| r.expect("every cell ran"))
        .collect()
}

/// Stable CSV rendering; floats carry 17 significant digits.
pub fn to_csv(cells: &[CellResult]) -> String {
    let mut out = String::from("c,n,mean_time,std_time,mean_iters,accuracy\n");
    for cell in cells {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            g17(cell.c),
            cell.n,
            g17(cell.mean_time),
            g17(cell.std_time),
            g17(cell.mean_iters),
            g17(cell.accuracy),
        ));
    }
    out
}
