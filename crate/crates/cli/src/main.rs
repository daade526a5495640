//! Command-line trainer, predictor, and benchmark harness.
//!
//! Exit codes: 0 on success (training converged), 2 on input errors,
//! 3 when the iteration cap was reached without convergence, 1 on
//! internal solver failures.

mod model_file;
mod report;
mod sweep;

use clap::{Args, Parser, Subcommand, ValueEnum};
use psvm::data::Kernel;
use psvm::io::{self, ScalingMode};
use psvm::models::{CurvatureBound, ModelSpec, Objective, SvmVariant, TrainData};
use psvm::oracle;
use psvm::solver::{HomotopyConfig, SolverConfig};
use psvm::Dataset;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const EXIT_OK: u8 = 0;
const EXIT_FAILURE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_MAX_ITER: u8 = 3;

#[derive(Parser)]
#[command(
    name = "psvm",
    version,
    about = "Primal SVM solvers: smoothed losses, accelerated gradients, homotopy continuation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a model on an SVM-Light/LIBSVM format file.
    Train(TrainArgs),
    /// Score a data file with a saved model.
    Predict(PredictArgs),
    /// Benchmark sweeps over C and training-set size; writes CSV.
    Sweep(SweepArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModelKind {
    Csvm,
    Lpsvm,
    Lssvm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum KernelKind {
    Linear,
    Rbf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScaleKind {
    None,
    Minmax,
    Unitl2,
}

impl ScaleKind {
    fn mode(self) -> ScalingMode {
        match self {
            ScaleKind::None => ScalingMode::None,
            ScaleKind::Minmax => ScalingMode::MinMaxPerFeature,
            ScaleKind::Unitl2 => ScalingMode::UnitL2PerSample,
        }
    }

    fn tag(self) -> &'static str {
        match self {
            ScaleKind::None => "none",
            ScaleKind::Minmax => "minmax",
            ScaleKind::Unitl2 => "unitl2",
        }
    }
}

#[derive(Args, Clone)]
struct ModelFlags {
    /// SVM variant to train.
    #[arg(long, value_enum, default_value = "csvm")]
    model: ModelKind,
    /// SVM parameter C.
    #[arg(long, default_value_t = 1.0)]
    c: f64,
    /// Smooth parameter (hinge for csvm, l1 for lpsvm; ignored by lssvm).
    #[arg(long, default_value_t = 5.0)]
    mu: f64,
    /// Hinge smooth parameter for lpsvm (defaults to --mu).
    #[arg(long)]
    nu: Option<f64>,
    /// Stopping tolerance on successive objective values.
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long, value_enum, default_value = "linear")]
    kernel: KernelKind,
    /// RBF width; defaults to the feature count.
    #[arg(long)]
    rbf_width: Option<f64>,
    /// Append an unpenalized bias term.
    #[arg(long, value_enum, default_value = "off")]
    bias: Switch,
    /// Iteration cap.
    #[arg(long, default_value_t = 100_000)]
    max_iter: usize,
    /// Use spectral (power-iteration) curvature bounds instead of the
    /// per-row forms.
    #[arg(long)]
    strict_lipschitz: bool,
    /// Feature scaling, learned on the training data.
    #[arg(long, value_enum, default_value = "none")]
    scale: ScaleKind,
}

impl ModelFlags {
    fn spec(&self, feature_dim: usize) -> ModelSpec {
        let mut spec = match self.model {
            ModelKind::Csvm => ModelSpec::csvm(self.c),
            ModelKind::Lpsvm => ModelSpec::lpsvm(self.c).with_nu(self.nu.unwrap_or(self.mu)),
            ModelKind::Lssvm => ModelSpec::lssvm(self.c),
        };
        spec = spec.with_mu(self.mu).with_bias(self.bias == Switch::On);
        if self.kernel == KernelKind::Rbf {
            let width = self.rbf_width.unwrap_or(feature_dim as f64);
            spec = spec.with_kernel(Kernel::Rbf { width });
        }
        if self.strict_lipschitz {
            spec = spec.with_curvature_bound(CurvatureBound::Spectral);
        }
        spec
    }
}

#[derive(Args)]
struct TrainArgs {
    /// Training data (SVM-Light text, `.gz` accepted).
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    flags: ModelFlags,
    /// `off` or `mu0:mustar` for homotopy continuation.
    #[arg(long, default_value = "off")]
    homotopy: String,
    /// Seed echoed into reports and used by any randomized preprocessing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Where to write the model file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Where to write the JSON run report.
    #[arg(long)]
    report: Option<PathBuf>,
    /// Run finite-difference gradient checks on this data before training.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct PredictArgs {
    /// Saved model file.
    #[arg(long)]
    model: PathBuf,
    /// Data to score (labels are used only to print accuracy).
    #[arg(long)]
    data: PathBuf,
    /// Output file, one prediction in {-1, +1} per line.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    flags: ModelFlags,
    /// Comma-separated C values; default is the 7-value log grid
    /// 1e-3..1e3.
    #[arg(long)]
    c_grid: Option<String>,
    /// Comma-separated training-set sizes to subsample; default is the
    /// full set.
    #[arg(long)]
    sizes: Option<String>,
    /// Timing repeats per cell.
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Benchmark the plain subgradient baseline instead of the
    /// accelerated solver.
    #[arg(long)]
    baseline: bool,
    /// Iteration budget for the baseline.
    #[arg(long, default_value_t = 2000)]
    baseline_iters: usize,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Train(args) => cmd_train(&args),
        Command::Predict(args) => cmd_predict(&args),
        Command::Sweep(args) => cmd_sweep(&args),
    };
    ExitCode::from(code)
}

fn fail(code: u8, msg: impl std::fmt::Display) -> u8 {
    eprintln!("error: {msg}");
    code
}

/// Loads records, applies scaling, and produces a dense training set plus
/// the learned scaling (for the model file).
fn load_training_data(path: &Path, scale: ScaleKind) -> Result<(Dataset, io::Scaling), String> {
    let records = io::read_records(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let dim = io::max_index(&records);
    let mut rows = io::densify_rows(&records, dim).map_err(|e| e.to_string())?;
    let scaling = io::Scaling::fit(scale.mode(), &rows);
    scaling.apply(&mut rows);
    let labels: Vec<f64> = records.iter().map(|r| r.label).collect();
    let samples: Vec<(Vec<f64>, f64)> = rows.into_iter().zip(labels).collect();
    let dataset = Dataset::from_samples(&samples).map_err(|e| e.to_string())?;
    Ok((dataset, scaling))
}

fn parse_homotopy(text: &str) -> Result<Option<HomotopyConfig>, String> {
    if text == "off" {
        return Ok(None);
    }
    let (mu0, mu_star) = text
        .split_once(':')
        .ok_or_else(|| format!("--homotopy expects off or mu0:mustar, got {text:?}"))?;
    let mu0: f64 = mu0.parse().map_err(|e| format!("bad mu0: {e}"))?;
    let mu_star: f64 = mu_star.parse().map_err(|e| format!("bad mustar: {e}"))?;
    Ok(Some(HomotopyConfig::new(mu0, mu_star)))
}

/// Finite-difference check of the assembled objective at a few
/// kink-avoiding points; returns the worst relative error.
fn verify_gradients(d: &Dataset, spec: &ModelSpec) -> Result<f64, String> {
    let prepared;
    let data = if spec.bias {
        prepared = d.augment_bias();
        TrainData::Linear(&prepared)
    } else {
        TrainData::Linear(d)
    };
    let obj = Objective::new(data, spec.clone()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    let mut checked = 0;
    let mut tries = 0;
    while checked < 5 {
        tries += 1;
        if tries > 10_000 {
            return Err("could not sample kink-free verification points".into());
        }
        let w: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let margins = match data {
            TrainData::Linear(dd) => dd.margins(&w),
            TrainData::Kernel(g) => g.margins(&w),
        };
        let inf_norms = match data {
            TrainData::Linear(dd) => dd.row_inf_norms(),
            TrainData::Kernel(g) => g.row_inf_norms(),
        };
        if spec.variant != SvmVariant::LsSvm
            && !oracle::hinge_kink_free_margins(&margins, inf_norms, spec.hinge_mu(), 1e-3)
        {
            continue;
        }
        if spec.variant == SvmVariant::LpSvm {
            let reg_len = w.len() - usize::from(spec.bias);
            if !oracle::l1_kink_free(&w[..reg_len], spec.mu, 1e-3) {
                continue;
            }
        }
        let analytic = obj.eval(&w).map_err(|e| e.to_string())?.gradient;
        let fd = oracle::fd_gradient(|v| obj.value(v).unwrap(), &w, &oracle::FdSpec::default())
            .map_err(|e| e.to_string())?;
        let num: f64 = analytic
            .iter()
            .zip(&fd)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        let den: f64 = fd.iter().map(|v| v * v).sum::<f64>().sqrt().max(1e-12);
        worst = worst.max(num / den);
        checked += 1;
    }
    Ok(worst)
}

fn cmd_train(args: &TrainArgs) -> u8 {
    let (dataset, scaling) = match load_training_data(&args.data, args.flags.scale) {
        Ok(v) => v,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let spec = args.flags.spec(dataset.dim());
    if let Err(e) = spec.validate() {
        return fail(EXIT_INPUT, e);
    }
    let homotopy = match parse_homotopy(&args.homotopy) {
        Ok(h) => h,
        Err(e) => return fail(EXIT_INPUT, e),
    };

    if args.verify {
        if spec.kernel != Kernel::Linear {
            eprintln!("note: --verify checks the linear assembly of the requested variant");
        }
        let mut linear_spec = spec.clone();
        linear_spec.kernel = Kernel::Linear;
        match verify_gradients(&dataset, &linear_spec) {
            Ok(worst) if worst < 1e-5 => {
                println!("verify: gradient checks passed (worst relative error {worst:.3e})");
            }
            Ok(worst) => {
                return fail(
                    EXIT_FAILURE,
                    format!("gradient verification failed: relative error {worst:.3e}"),
                );
            }
            Err(e) => return fail(EXIT_FAILURE, e),
        }
    }

    let config = SolverConfig::default()
        .with_epsilon(args.flags.eps)
        .with_max_iter(args.flags.max_iter);
    let started = Instant::now();
    let outcome = match &homotopy {
        None => psvm::train(&dataset, &spec, &config),
        Some(h) => psvm::train_homotopy(&dataset, &spec, &config, h),
    };
    let wall = started.elapsed().as_secs_f64();
    let model = match outcome {
        Ok(m) => m,
        Err(e) => return fail(EXIT_FAILURE, e),
    };

    let bundled = match model_file::from_trained(&model, &spec, &dataset) {
        Ok(mf) => mf.with_scaling(&scaling),
        Err(e) => return fail(EXIT_FAILURE, e),
    };
    let accuracy = bundled.predictor.accuracy_on(&dataset).ok();

    if let Some(out) = &args.out {
        if let Err(e) = model_file::save(&bundled, out) {
            return fail(EXIT_INPUT, format!("cannot write {}: {e}", out.display()));
        }
    }

    let report = report::RunReport {
        model: report::ModelEcho {
            variant: match spec.variant {
                SvmVariant::CSvm => "csvm".into(),
                SvmVariant::LpSvm => "lpsvm".into(),
                SvmVariant::LsSvm => "lssvm".into(),
            },
            c: spec.c,
            kernel: match spec.kernel {
                Kernel::Linear => "linear".into(),
                Kernel::Rbf { .. } => "rbf".into(),
            },
            rbf_width: match spec.kernel {
                Kernel::Rbf { width } => Some(width),
                Kernel::Linear => None,
            },
            bias: spec.bias,
            mu: spec.mu,
            nu: spec.nu,
        },
        solver: report::SolverEcho {
            epsilon: args.flags.eps,
            max_iter: args.flags.max_iter,
            seed: args.seed,
            homotopy: homotopy.as_ref().map(|h| report::HomotopyEcho {
                mu0: h.mu0,
                mu_star: h.mu_star,
            }),
            strict_lipschitz: args.flags.strict_lipschitz,
            scaling: args.flags.scale.tag().into(),
        },
        wall_time_seconds: wall,
        iterations: model.iterations,
        matvecs: model.matvecs,
        final_objective: model.final_objective,
        converged: model.converged,
        accuracy,
        stages: report::RunReport::stages_from(&model.stages),
    };
    if let Some(path) = &args.report {
        if let Err(e) = std::fs::write(path, report.to_json()) {
            return fail(EXIT_INPUT, format!("cannot write {}: {e}", path.display()));
        }
    }
    println!(
        "trained {} in {:.3}s: {} iterations, objective {:.6e}, converged {}{}",
        args.data.display(),
        wall,
        model.iterations,
        model.final_objective,
        model.converged,
        accuracy
            .map(|a| format!(", train accuracy {a:.4}"))
            .unwrap_or_default()
    );
    if model.converged {
        EXIT_OK
    } else {
        EXIT_MAX_ITER
    }
}

fn cmd_predict(args: &PredictArgs) -> u8 {
    let mf = match model_file::load(&args.model) {
        Ok(m) => m,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let records = match io::read_records(&args.data) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", args.data.display())),
    };
    let dim = mf.predictor.input_dim();
    let mut rows = match io::densify_rows(&records, dim) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    mf.scaling().apply(&mut rows);

    let mut out = String::with_capacity(rows.len() * 3);
    let mut hits = 0usize;
    for (row, record) in rows.iter().zip(&records) {
        let label = match mf.predictor.classify(row) {
            Ok(v) => v,
            Err(e) => return fail(EXIT_INPUT, e),
        };
        out.push_str(if label > 0.0 { "+1\n" } else { "-1\n" });
        if label == record.label {
            hits += 1;
        }
    }
    if let Err(e) = std::fs::write(&args.out, out) {
        return fail(
            EXIT_INPUT,
            format!("cannot write {}: {e}", args.out.display()),
        );
    }
    if !records.is_empty() {
        println!(
            "accuracy {:.6} on {} samples",
            hits as f64 / records.len() as f64,
            records.len()
        );
    }
    EXIT_OK
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    text.split(',')
        .map(|tok| {
            tok.trim()
                .parse::<T>()
                .map_err(|e| format!("bad {what} entry {tok:?}: {e}"))
        })
        .collect()
}

fn cmd_sweep(args: &SweepArgs) -> u8 {
    let records = match io::read_records(&args.data) {
        Ok(r) => r,
        Err(e) => return fail(EXIT_INPUT, format!("{}: {e}", args.data.display())),
    };
    let full_dim = io::max_index(&records);
    let c_grid = match &args.c_grid {
        Some(text) => match parse_list::<f64>(text, "c-grid") {
            Ok(g) => g,
            Err(e) => return fail(EXIT_INPUT, e),
        },
        None => sweep::default_c_grid(),
    };
    let sizes = match &args.sizes {
        Some(text) => match parse_list::<usize>(text, "sizes") {
            Ok(s) => s,
            Err(e) => return fail(EXIT_INPUT, e),
        },
        None => vec![records.len()],
    };
    if args.repeats == 0 {
        return fail(EXIT_INPUT, "--repeats must be at least 1");
    }
    let plan = sweep::SweepPlan {
        c_grid,
        sizes,
        repeats: args.repeats,
        seed: args.seed,
        baseline: args.baseline,
        baseline_iters: args.baseline_iters,
    };
    let spec = args.flags.spec(full_dim);
    if let Err(e) = spec.validate() {
        return fail(EXIT_INPUT, e);
    }
    if args.baseline && spec.variant == SvmVariant::LsSvm {
        return fail(
            EXIT_INPUT,
            "the subgradient baseline covers hinge-loss variants only",
        );
    }
    let config = SolverConfig::default()
        .with_epsilon(args.flags.eps)
        .with_max_iter(args.flags.max_iter);
    let scale_mode = args.flags.scale.mode();
    let cells = match sweep::run_sweep(&records, &spec, &config, &plan, |subset| {
        let mut rows = io::densify_rows(subset, full_dim).map_err(|e| e.to_string())?;
        let scaling = io::Scaling::fit(scale_mode, &rows);
        scaling.apply(&mut rows);
        let labels: Vec<f64> = subset.iter().map(|r| r.label).collect();
        let samples: Vec<(Vec<f64>, f64)> = rows.into_iter().zip(labels).collect();
        Dataset::from_samples(&samples).map_err(|e| e.to_string())
    }) {
        Ok(cells) => cells,
        Err(e) => return fail(EXIT_INPUT, e),
    };
    let csv = sweep::to_csv(&cells);
    if let Err(e) = std::fs::write(&args.out, csv) {
        return fail(
            EXIT_INPUT,
            format!("cannot write {}: {e}", args.out.display()),
        );
    }
    println!(
        "swept {} cells ({} C values x {} sizes, {} repeats) -> {}",
        cells.len(),
        plan.c_grid.len(),
        plan.sizes.len(),
        plan.repeats,
        args.out.display()
    );
    EXIT_OK
}
