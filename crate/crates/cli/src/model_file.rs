//! Versioned text model files.
//!
//! The format is line-oriented, diff-able, and exact: every float is
//! written with 17 significant digits so parsing reproduces the trained
//! model bit for bit. Kernel models embed their support samples.

use psvm::data::Kernel;
use psvm::models::{ModelSpec, SvmVariant};
use psvm::predict::Predictor;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

pub const MAGIC: &str = "psvm-model v1";

/// Everything needed to score new samples plus the training configuration
/// echo.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelFile {
    pub variant: SvmVariant,
    pub c: f64,
    pub mu: f64,
    pub nu: Option<f64>,
    pub predictor: Predictor,
    /// Feature scaling learned at training time; applied to inputs before
    /// scoring.
    pub scaling: ScalingBlock,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum ScalingBlock {
    #[default]
    None,
    MinMax(Vec<(f64, f64)>),
    UnitL2,
}

impl ModelFile {
    pub fn with_scaling(mut self, scaling: &psvm::io::Scaling) -> Self {
        self.scaling = match scaling.mode {
            psvm::io::ScalingMode::None => ScalingBlock::None,
            psvm::io::ScalingMode::MinMaxPerFeature => {
                ScalingBlock::MinMax(scaling.feature_ranges().unwrap_or(&[]).to_vec())
            }
            psvm::io::ScalingMode::UnitL2PerSample => ScalingBlock::UnitL2,
        };
        self
    }

    /// The scaling transform to apply to incoming rows.
    pub fn scaling(&self) -> psvm::io::Scaling {
        match &self.scaling {
            ScalingBlock::None => psvm::io::Scaling::from_parts(psvm::io::ScalingMode::None, None),
            ScalingBlock::MinMax(ranges) => psvm::io::Scaling::from_parts(
                psvm::io::ScalingMode::MinMaxPerFeature,
                Some(ranges.clone()),
            ),
            ScalingBlock::UnitL2 => {
                psvm::io::Scaling::from_parts(psvm::io::ScalingMode::UnitL2PerSample, None)
            }
        }
    }
}

/// 17-significant-digit decimal; round-trips any finite f64 exactly.
pub fn g17(v: f64) -> String {
    format!("{v:.16e}")
}

fn variant_tag(v: SvmVariant) -> &'static str {
    match v {
        SvmVariant::CSvm => "csvm",
        SvmVariant::LpSvm => "lpsvm",
        SvmVariant::LsSvm => "lssvm",
    }
}

fn parse_variant(tag: &str) -> Result<SvmVariant, String> {
    match tag {
        "csvm" => Ok(SvmVariant::CSvm),
        "lpsvm" => Ok(SvmVariant::LpSvm),
        "lssvm" => Ok(SvmVariant::LsSvm),
        other => Err(format!("unknown variant {other:?}")),
    }
}

pub fn render(model: &ModelFile) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{MAGIC}");
    let _ = writeln!(out, "variant {}", variant_tag(model.variant));
    let _ = writeln!(out, "c {}", g17(model.c));
    let _ = writeln!(out, "mu {}", g17(model.mu));
    if let Some(nu) = model.nu {
        let _ = writeln!(out, "nu {}", g17(nu));
    }
    match &model.predictor {
        Predictor::Linear { w, bias } => {
            let _ = writeln!(out, "kernel linear");
            let _ = writeln!(out, "bias {}", if *bias { "on" } else { "off" });
            let _ = writeln!(out, "weights {}", w.len());
            for v in w {
                let _ = writeln!(out, "{}", g17(*v));
            }
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
            let _ = writeln!(out, "kernel rbf {}", g17(*width));
            let _ = writeln!(out, "bias {}", if *bias { "on" } else { "off" });
            let _ = writeln!(out, "weights {}", alpha.len());
            for v in alpha {
                let _ = writeln!(out, "{}", g17(*v));
            }
            let _ = writeln!(out, "support {n} {p}");
            for i in 0..*n {
                let mut line = String::new();
                let _ = write!(line, "{}", if labels[i] > 0.0 { "+1" } else { "-1" });
                for v in &support[i * p..(i + 1) * p] {
                    let _ = write!(line, " {}", g17(*v));
                }
                let _ = writeln!(out, "{line}");
            }
        }
    }
    match &model.scaling {
        ScalingBlock::None => {
            let _ = writeln!(out, "scaling none");
        }
        ScalingBlock::UnitL2 => {
            let _ = writeln!(out, "scaling unitl2");
        }
        ScalingBlock::MinMax(ranges) => {
            let _ = writeln!(out, "scaling minmax {}", ranges.len());
            for (lo, hi) in ranges {
                let _ = writeln!(out, "{} {}", g17(*lo), g17(*hi));
            }
        }
    }
    let _ = writeln!(out, "end");
    out
}

pub fn save(model: &ModelFile, path: &Path) -> std::io::Result<()> {
    fs::write(path, render(model))
}

pub fn parse(text: &str) -> Result<ModelFile, String> {
    let mut lines = text.lines();
    let magic = lines.next().ok_or("empty model file")?;
    if magic != MAGIC {
        return Err(format!("bad magic line {magic:?}, expected {MAGIC:?}"));
    }
    let mut variant = None;
    let mut c = None;
    let mut mu = None;
    let mut nu = None;
    let mut kernel: Option<Kernel> = None;
    let mut bias = None;
    let mut weights: Option<Vec<f64>> = None;
    let mut support_block: Option<(usize, usize, Vec<f64>, Vec<f64>)> = None;
    let mut scaling = ScalingBlock::None;

    let parse_f64 = |s: &str| -> Result<f64, String> {
        s.parse::<f64>()
            .map_err(|e| format!("bad float {s:?}: {e}"))
    };

    while let Some(line) = lines.next() {
        let mut tokens = line.split_whitespace();
        match tokens.next() {
            Some("variant") => {
                variant = Some(parse_variant(tokens.next().ok_or("missing variant")?)?)
            }
            Some("c") => c = Some(parse_f64(tokens.next().ok_or("missing c")?)?),
            Some("mu") => mu = Some(parse_f64(tokens.next().ok_or("missing mu")?)?),
            Some("nu") => nu = Some(parse_f64(tokens.next().ok_or("missing nu")?)?),
            Some("kernel") => {
                kernel = Some(match tokens.next() {
                    Some("linear") => Kernel::Linear,
                    Some("rbf") => Kernel::Rbf {
                        width: parse_f64(tokens.next().ok_or("missing rbf width")?)?,
                    },
                    other => return Err(format!("unknown kernel {other:?}")),
                })
            }
            Some("bias") => {
                bias = Some(match tokens.next() {
                    Some("on") => true,
                    Some("off") => false,
                    other => return Err(format!("bad bias flag {other:?}")),
                })
            }
            Some("weights") => {
                let count: usize = tokens
                    .next()
                    .ok_or("missing weight count")?
                    .parse()
                    .map_err(|e| format!("bad weight count: {e}"))?;
                let mut w = Vec::with_capacity(count);
                for _ in 0..count {
                    let line = lines.next().ok_or("weight lines truncated")?;
                    w.push(parse_f64(line.trim())?);
                }
                weights = Some(w);
            }
            Some("support") => {
                let n: usize = tokens
                    .next()
                    .ok_or("missing support n")?
                    .parse()
                    .map_err(|e| format!("bad support n: {e}"))?;
                let p: usize = tokens
                    .next()
                    .ok_or("missing support p")?
                    .parse()
                    .map_err(|e| format!("bad support p: {e}"))?;
                let mut support = Vec::with_capacity(n * p);
                let mut labels = Vec::with_capacity(n);
                for _ in 0..n {
                    let line = lines.next().ok_or("support lines truncated")?;
                    let mut tok = line.split_whitespace();
                    let label = match tok.next() {
                        Some("+1") => 1.0,
                        Some("-1") => -1.0,
                        other => return Err(format!("bad support label {other:?}")),
                    };
                    labels.push(label);
                    for _ in 0..p {
                        support.push(parse_f64(tok.next().ok_or("support row truncated")?)?);
                    }
                }
                support_block = Some((n, p, support, labels));
            }
            Some("scaling") => {
                scaling = match tokens.next() {
                    Some("none") => ScalingBlock::None,
                    Some("unitl2") => ScalingBlock::UnitL2,
                    Some("minmax") => {
                        let count: usize = tokens
                            .next()
                            .ok_or("missing minmax count")?
                            .parse()
                            .map_err(|e| format!("bad minmax count: {e}"))?;
                        let mut ranges = Vec::with_capacity(count);
                        for _ in 0..count {
                            let line = lines.next().ok_or("scaling lines truncated")?;
                            let mut tok = line.split_whitespace();
                            let lo = parse_f64(tok.next().ok_or("missing range low")?)?;
                            let hi = parse_f64(tok.next().ok_or("missing range high")?)?;
                            ranges.push((lo, hi));
                        }
                        ScalingBlock::MinMax(ranges)
                    }
                    other => return Err(format!("unknown scaling mode {other:?}")),
                };
            }
            Some("end") => break,
            Some(other) => return Err(format!("unknown model-file key {other:?}")),
            None => continue,
        }
    }

    let bias = bias.ok_or("missing bias flag")?;
    let weights = weights.ok_or("missing weights")?;
    let predictor = match kernel.ok_or("missing kernel line")? {
        Kernel::Linear => {
            if support_block.is_some() {
                return Err("support block in a linear model".into());
            }
            Predictor::Linear { w: weights, bias }
        }
        Kernel::Rbf { width } => {
            let (n, p, support, labels) = support_block.ok_or("rbf model missing support block")?;
            Predictor::Rbf {
                alpha: weights,
                bias,
                width,
                support,
                labels,
                n,
                p,
            }
        }
    };
    Ok(ModelFile {
        variant: variant.ok_or("missing variant")?,
        c: c.ok_or("missing c")?,
        mu: mu.ok_or("missing mu")?,
        nu,
        predictor,
        scaling,
    })
}

pub fn load(path: &Path) -> Result<ModelFile, String> {
    let text =
        fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse(&text)
}

/// Bundles a trained model and its training data into a savable file.
pub fn from_trained(
    model: &psvm::TrainedModel,
    spec: &ModelSpec,
    train_data: &psvm::Dataset,
) -> Result<ModelFile, psvm::PredictError> {
    Ok(ModelFile {
        variant: spec.variant,
        c: spec.c,
        mu: spec.mu,
        nu: spec.nu,
        predictor: Predictor::from_trained(model, train_data)?,
        scaling: ScalingBlock::None,
    })
}
