//! LIBSVM / SVM-Light text format, train/test splitting, feature scaling.
//!
//! One record per line: `<label> <index>:<value> ...` with 1-based strictly
//! increasing indices; `#` starts a comment. Labels map as `{+1, 1} -> +1`
//! and `{-1, 0} -> -1`; anything else is an error rather than a silent
//! coercion. Files ending in `.gz` are transparently decompressed.

use crate::data::{DataError, Dataset};
use flate2::read::GzDecoder;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fs::File;
use std::io::Read;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("line {line}: malformed record: {detail}")]
    MalformedLine { line: usize, detail: String },
    #[error("line {line}: feature indices must be strictly increasing")]
    NonMonotonicIndex { line: usize },
    #[error("line {line}: label {label} is not mappable (only -1, 0, +1 accepted)")]
    UnmappableLabel { line: usize, label: String },
    #[error("need at least 2 records to split, got {got}")]
    TooFewSamples { got: usize },
    #[error("record {row} has feature index {index} beyond dimension {dim}")]
    IndexBeyondDimension {
        row: usize,
        index: usize,
        dim: usize,
    },
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// One parsed sparse record: mapped label and 1-based `(index, value)`
/// entries with strictly increasing indices.
#[derive(Debug, Clone, PartialEq)]
pub struct SvmLightRecord {
    pub label: f64,
    pub entries: Vec<(usize, f64)>,
}

fn map_label(token: &str, line: usize) -> Result<f64, IoError> {
    let parsed: f64 = token.parse().map_err(|_| IoError::MalformedLine {
        line,
        detail: format!("unparseable label {token:?}"),
    })?;
    if parsed == 1.0 {
        Ok(1.0)
    } else if parsed == -1.0 || parsed == 0.0 {
        Ok(-1.0)
    } else {
        Err(IoError::UnmappableLabel {
            line,
            label: token.to_string(),
        })
    }
}

/// Parses the text format. Blank lines and `#` comments are skipped;
/// a `#` mid-line truncates the rest of the line.
pub fn parse_svmlight(text: &str) -> Result<Vec<SvmLightRecord>, IoError> {
    let mut records = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("");
        let mut tokens = content.split_whitespace();
        let label_token = match tokens.next() {
            Some(t) => t,
            None => continue,
        };
        let label = map_label(label_token, line)?;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for token in tokens {
            let (i_str, v_str) = token
                .split_once(':')
                .ok_or_else(|| IoError::MalformedLine {
                    line,
                    detail: format!("expected index:value, got {token:?}"),
                })?;
            let index: usize = i_str.parse().map_err(|_| IoError::MalformedLine {
                line,
                detail: format!("bad feature index {i_str:?}"),
            })?;
            if index == 0 {
                return Err(IoError::MalformedLine {
                    line,
                    detail: "feature indices are 1-based".into(),
                });
            }
            let value: f64 = v_str.parse().map_err(|_| IoError::MalformedLine {
                line,
                detail: format!("bad feature value {v_str:?}"),
            })?;
            if let Some(&(last, _)) = entries.last() {
                if index <= last {
                    return Err(IoError::NonMonotonicIndex { line });
                }
            }
            entries.push((index, value));
        }
        records.push(SvmLightRecord { label, entries });
    }
    Ok(records)
}

/// Reads and parses a file, decompressing when the extension is `.gz`.
pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<SvmLightRecord>, IoError> {
    let path = path.as_ref();
    let mut text = String::new();
    let file = File::open(path)?;
    if path.extension().is_some_and(|e| e == "gz") {
        GzDecoder::new(file).read_to_string(&mut text)?;
    } else {
        let mut file = file;
        file.read_to_string(&mut text)?;
    }
    parse_svmlight(&text)
}

/// Canonical serialization; re-parsing it reproduces the records exactly.
pub fn serialize_svmlight(records: &[SvmLightRecord]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(if r.label > 0.0 { "+1" } else { "-1" });
        for &(i, v) in &r.entries {
            out.push_str(&format!(" {i}:{v}"));
        }
        out.push('\n');
    }
    out
}

/// Largest feature index across all records (0 for an empty set).
pub fn max_index(records: &[SvmLightRecord]) -> usize {
    records
        .iter()
        .filter_map(|r| r.entries.last().map(|&(i, _)| i))
        .max()
        .unwrap_or(0)
}

/// Densifies to `dim` columns; missing indices become exact zeros.
pub fn densify_rows(records: &[SvmLightRecord], dim: usize) -> Result<Vec<Vec<f64>>, IoError> {
    let mut rows = Vec::with_capacity(records.len());
    for (row, r) in records.iter().enumerate() {
        let mut dense = vec![0.0; dim];
        for &(index, value) in &r.entries {
            if index > dim {
                return Err(IoError::IndexBeyondDimension { row, index, dim });
            }
            dense[index - 1] = value;
        }
        rows.push(dense);
    }
    Ok(rows)
}

/// Builds a training [`Dataset`] densified to the global max index.
pub fn to_dataset(records: &[SvmLightRecord]) -> Result<Dataset, IoError> {
    to_dataset_with_dim(records, max_index(records))
}

/// Builds a training [`Dataset`] densified to a caller-chosen dimension
/// (for example a model's dimension when loading evaluation data).
pub fn to_dataset_with_dim(records: &[SvmLightRecord], dim: usize) -> Result<Dataset, IoError> {
    let rows = densify_rows(records, dim)?;
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * dim);
    for row in rows {
        flat.extend(row);
    }
    let labels: Vec<f64> = records.iter().map(|r| r.label).collect();
    Ok(Dataset::from_dense(flat, n, dim, labels)?)
}

/// Outcome of a train/test split.
#[derive(Debug, Clone)]
pub struct SplitOutcome {
    pub train: Vec<SvmLightRecord>,
    pub test: Vec<SvmLightRecord>,
    /// False when one class was absent and the split degraded to a plain
    /// shuffle.
    pub stratified: bool,
}

/// Deterministic stratified split: same `seed` reproduces the same split;
/// each side keeps at least one sample of each class when class sizes
/// allow it.
pub fn split(
    records: &[SvmLightRecord],
    train_fraction: f64,
    seed: u64,
) -> Result<SplitOutcome, IoError> {
    if records.len() < 2 {
        return Err(IoError::TooFewSamples { got: records.len() });
    }
    assert!(
        train_fraction > 0.0 && train_fraction < 1.0,
        "train fraction must be in (0, 1)"
    );
    let n = records.len();
    let target = ((n as f64 * train_fraction).round() as usize).clamp(1, n - 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut pos: Vec<usize> = (0..n).filter(|&i| records[i].label > 0.0).collect();
    let mut neg: Vec<usize> = (0..n).filter(|&i| records[i].label < 0.0).collect();

    let (train_idx, stratified) = if pos.is_empty() || neg.is_empty() {
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(&mut rng);
        (all[..target].to_vec(), false)
    } else {
        pos.shuffle(&mut rng);
        neg.shuffle(&mut rng);
        let bounded = |want: i64, len: usize| -> usize {
            let (lo, hi) = if len >= 2 {
                (1i64, len as i64 - 1)
            } else {
                (0i64, len as i64)
            };
            want.clamp(lo, hi) as usize
        };
        let mut t_pos = bounded(
            (pos.len() as f64 * train_fraction).round() as i64,
            pos.len(),
        );
        let t_neg = bounded(target as i64 - t_pos as i64, neg.len());
        // Re-balance the positive share if the negative side was clamped.
        t_pos = bounded(target as i64 - t_neg as i64, pos.len());
        let mut idx: Vec<usize> = pos[..t_pos].to_vec();
        idx.extend_from_slice(&neg[..t_neg]);
        (idx, true)
    };

    let mut in_train = vec![false; n];
    for &i in &train_idx {
        in_train[i] = true;
    }
    let mut train = Vec::with_capacity(train_idx.len());
    let mut test = Vec::with_capacity(n - train_idx.len());
    for (i, r) in records.iter().enumerate() {
        if in_train[i] {
            train.push(r.clone());
        } else {
            test.push(r.clone());
        }
    }
    Ok(SplitOutcome {
        train,
        test,
        stratified,
    })
}

/// Feature scaling policy, learned on the training split only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScalingMode {
    #[default]
    None,
    MinMaxPerFeature,
    UnitL2PerSample,
}

/// Learned scaling parameters; apply identically to train and test.
#[derive(Debug, Clone)]
pub struct Scaling {
    pub mode: ScalingMode,
    feature_ranges: Option<Vec<(f64, f64)>>,
}

impl Scaling {
    /// Rebuilds a scaling from stored parts (for model-file loading).
    pub fn from_parts(mode: ScalingMode, feature_ranges: Option<Vec<(f64, f64)>>) -> Scaling {
        Scaling {
            mode,
            feature_ranges,
        }
    }

    /// Learned per-feature `(min, max)` ranges, when the mode has them.
    pub fn feature_ranges(&self) -> Option<&[(f64, f64)]> {
        self.feature_ranges.as_deref()
    }

    /// Learns scaling parameters from training rows.
    pub fn fit(mode: ScalingMode, rows: &[Vec<f64>]) -> Scaling {
        let feature_ranges = match mode {
            ScalingMode::MinMaxPerFeature => {
                let dim = rows.first().map_or(0, Vec::len);
                let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); dim];
                for row in rows {
                    for (r, &v) in ranges.iter_mut().zip(row) {
                        r.0 = r.0.min(v);
                        r.1 = r.1.max(v);
                    }
                }
                Some(ranges)
            }
            _ => None,
        };
        Scaling {
            mode,
            feature_ranges,
        }
    }

    /// Applies the learned transform in place.
    pub fn apply(&self, rows: &mut [Vec<f64>]) {
        match self.mode {
            ScalingMode::None => {}
            ScalingMode::MinMaxPerFeature => {
                let ranges = self.feature_ranges.as_ref().expect("fitted");
                for row in rows.iter_mut() {
                    for (v, &(lo, hi)) in row.iter_mut().zip(ranges) {
                        *v = if hi > lo { (*v - lo) / (hi - lo) } else { 0.0 };
                    }
                }
            }
            ScalingMode::UnitL2PerSample => {
                for row in rows.iter_mut() {
                    let norm = row.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        for v in row.iter_mut() {
                            *v /= norm;
                        }
                    }
                }
            }
        }
    }
}
