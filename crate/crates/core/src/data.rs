//! Dense training containers with precomputed per-row statistics.
//!
//! Every solver path consumes either a [`Dataset`] (linear models, rows are
//! raw feature vectors) or a [`GramDataset`] (kernel models, rows are the
//! label-scaled kernel matrix). Both precompute the per-row infinity norms
//! and squared 2-norms that the smoothing formulas and Lipschitz constants
//! need, and both are immutable after construction so they can be shared
//! across concurrent solves.

use thiserror::Error;

/// Errors raised while building or combining data containers.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("label at row {row} is {label}; labels must be exactly -1 or +1")]
    LabelOutOfRange { row: usize, label: f64 },
    #[error("row {row} is all zeros; remove the sample or perturb it before training")]
    ZeroRow { row: usize },
    #[error("row {row} has {got} features, expected {expected}")]
    RaggedRow {
        row: usize,
        got: usize,
        expected: usize,
    },
    #[error("non-finite feature value in row {row}")]
    NonFiniteFeature { row: usize },
    #[error("kernel width must be positive, got {width}")]
    NonPositiveKernelWidth { width: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// Kernel family used when training a nonlinear model.
///
/// The RBF entry is `K(a, b) = exp(-||a - b||^2 / width)`; passing
/// `width = p` (the feature count) gives the default width used by the
/// benchmark harness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Kernel {
    Linear,
    Rbf { width: f64 },
}

/// A dense labelled training set.
///
/// Stores the `n x p` feature matrix row-major together with the label
/// vector and per-row norms. Labels are strictly `-1.0` or `+1.0` and no
/// row may be entirely zero: the smoothed hinge dual divides by
/// `mu * ||X_i||_inf`, so a zero row would poison every iteration.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: Vec<f64>,
    n: usize,
    p: usize,
    y: Vec<f64>,
    row_inf_norms: Vec<f64>,
    row_sq_norms: Vec<f64>,
    bias_augmented: bool,
}

fn check_label(row: usize, label: f64) -> Result<(), DataError> {
    if label == 1.0 || label == -1.0 {
        Ok(())
    } else {
        Err(DataError::LabelOutOfRange { row, label })
    }
}

fn row_norms(row: usize, feats: &[f64]) -> Result<(f64, f64), DataError> {
    let mut inf = 0.0f64;
    let mut sq = 0.0f64;
    for &v in feats {
        if !v.is_finite() {
            return Err(DataError::NonFiniteFeature { row });
        }
        inf = inf.max(v.abs());
        sq += v * v;
    }
    if inf == 0.0 {
        return Err(DataError::ZeroRow { row });
    }
    Ok((inf, sq))
}

impl Dataset {
    /// Builds a dataset from `(features, label)` rows, precomputing norms.
    pub fn from_samples(rows: &[(Vec<f64>, f64)]) -> Result<Self, DataError> {
        if rows.is_empty() {
            return Err(DataError::EmptyDataset);
        }
        let p = rows[0].0.len();
        if p == 0 {
            return Err(DataError::EmptyDataset);
        }
        let n = rows.len();
        let mut x = Vec::with_capacity(n * p);
        let mut y = Vec::with_capacity(n);
        for (i, (feats, label)) in rows.iter().enumerate() {
            if feats.len() != p {
                return Err(DataError::RaggedRow {
                    row: i,
                    got: feats.len(),
                    expected: p,
                });
            }
            check_label(i, *label)?;
            x.extend_from_slice(feats);
            y.push(*label);
        }
        Self::from_dense(x, n, p, y)
    }

    /// Builds a dataset from an already-flattened row-major matrix.
    pub fn from_dense(x: Vec<f64>, n: usize, p: usize, y: Vec<f64>) -> Result<Self, DataError> {
        if n == 0 || p == 0 {
            return Err(DataError::EmptyDataset);
        }
        if x.len() != n * p {
            return Err(DataError::DimensionMismatch {
                expected: n * p,
                got: x.len(),
            });
        }
        if y.len() != n {
            return Err(DataError::DimensionMismatch {
                expected: n,
                got: y.len(),
            });
        }
        let mut row_inf_norms = Vec::with_capacity(n);
        let mut row_sq_norms = Vec::with_capacity(n);
        for i in 0..n {
            check_label(i, y[i])?;
            let (inf, sq) = row_norms(i, &x[i * p..(i + 1) * p])?;
            row_inf_norms.push(inf);
            row_sq_norms.push(sq);
        }
        Ok(Dataset {
            x,
            n,
            p,
            y,
            row_inf_norms,
            row_sq_norms,
            bias_augmented: false,
        })
    }

    /// Returns a copy with a constant-1 column appended as the LAST column.
    ///
    /// The trained weight's final entry is then the bias. Norms are
    /// recomputed (`row_inf_norms[i] = max(old, 1)`). Callers must not
    /// augment twice; [`Dataset::is_bias_augmented`] tracks the state.
    pub fn augment_bias(&self) -> Dataset {
        let p = self.p + 1;
        let mut x = Vec::with_capacity(self.n * p);
        for i in 0..self.n {
            x.extend_from_slice(self.row(i));
            x.push(1.0);
        }
        let row_inf_norms = self.row_inf_norms.iter().map(|&v| v.max(1.0)).collect();
        let row_sq_norms = self.row_sq_norms.iter().map(|&v| v + 1.0).collect();
        Dataset {
            x,
            n: self.n,
            p,
            y: self.y.clone(),
            row_inf_norms,
            row_sq_norms,
            bias_augmented: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Feature dimension (including the bias column if augmented).
    pub fn dim(&self) -> usize {
        self.p
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.p..(i + 1) * self.p]
    }

    pub fn row_inf_norms(&self) -> &[f64] {
        &self.row_inf_norms
    }

    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq_norms
    }

    pub fn is_bias_augmented(&self) -> bool {
        self.bias_augmented
    }

    /// `max_i ||X_i||_2^2 / ||X_i||_inf`, the row ratio inside the smoothed
    /// hinge Lipschitz constant.
    pub fn max_sq_over_inf(&self) -> f64 {
        self.row_sq_norms
            .iter()
            .zip(&self.row_inf_norms)
            .map(|(&sq, &inf)| sq / inf)
            .fold(0.0, f64::max)
    }

    /// `sum_i ||X_i||_2^2 / ||X_i||_inf`, the tighter row-sum variant.
    pub fn sum_sq_over_inf(&self) -> f64 {
        self.row_sq_norms
            .iter()
            .zip(&self.row_inf_norms)
            .map(|(&sq, &inf)| sq / inf)
            .sum()
    }

    pub fn max_row_sq(&self) -> f64 {
        self.row_sq_norms.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum_inf_norms(&self) -> f64 {
        self.row_inf_norms.iter().sum()
    }

    /// `(YX) w`: the margin vector `y_i * <X_i, w>`. One matrix-vector
    /// product; fixed reduction order so results are deterministic.
    pub fn margins(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.p, "weight length must match feature dim");
        (0..self.n)
            .map(|i| {
                let row = self.row(i);
                let dot: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
                self.y[i] * dot
            })
            .collect()
    }

    /// `(YX)^T c = sum_i c_i * y_i * X_i`. One matrix-vector product; the
    /// full loop runs regardless of zero coefficients so per-iteration
    /// cost is independent of the SVM parameter.
    pub fn weighted_rows(&self, coef: &[f64]) -> Vec<f64> {
        assert_eq!(
            coef.len(),
            self.n,
            "coefficient length must match sample count"
        );
        let mut out = vec![0.0; self.p];
        for (i, (&ci, &yi)) in coef.iter().zip(&self.y).enumerate() {
            let s = ci * yi;
            for (o, &v) in out.iter_mut().zip(self.row(i)) {
                *o += s * v;
            }
        }
        out
    }

    /// Plain `X v` (no label scaling); used by spectral curvature bounds.
    pub fn rows_times(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.p);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Plain `X^T c` (no label scaling).
    pub fn rows_transpose_times(&self, coef: &[f64]) -> Vec<f64> {
        assert_eq!(coef.len(), self.n);
        let mut out = vec![0.0; self.p];
        for (i, &s) in coef.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(self.row(i)) {
                *o += s * v;
            }
        }
        out
    }
}

/// Kernelized training data: the effective matrix `K(X,X) Y` plus the raw
/// kernel matrix needed by the quadratic regularizer.
///
/// Row norms are taken over the effective matrix, which is what the
/// smoothed hinge formulas see in the kernel case.
#[derive(Debug, Clone)]
pub struct GramDataset {
    effective: Vec<f64>, // n x d, d = n (+1 when bias-augmented)
    kernel: Vec<f64>,    // n x n, symmetric
    n: usize,
    d: usize,
    y: Vec<f64>,
    row_inf_norms: Vec<f64>,
    row_sq_norms: Vec<f64>,
    width: f64,
    bias_augmented: bool,
}

impl GramDataset {
    /// Builds the RBF Gram data for `K(a,b) = exp(-||a-b||^2 / width)`.
    pub fn rbf(d: &Dataset, width: f64) -> Result<Self, DataError> {
        if width <= 0.0 || width.is_nan() {
            return Err(DataError::NonPositiveKernelWidth { width });
        }
        let n = d.n();
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            kernel[i * n + i] = 1.0;
            for j in (i + 1)..n {
                let dist_sq: f64 = d
                    .row(i)
                    .iter()
                    .zip(d.row(j))
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum();
                let k = (-dist_sq / width).exp();
                kernel[i * n + j] = k;
                kernel[j * n + i] = k;
            }
        }
        // Effective matrix K(X,X) Y scales column j by y_j.
        let y = d.labels().to_vec();
        let mut effective = kernel.clone();
        for row in effective.chunks_mut(n) {
            for (v, &yj) in row.iter_mut().zip(&y) {
                *v *= yj;
            }
        }
        let mut row_inf_norms = Vec::with_capacity(n);
        let mut row_sq_norms = Vec::with_capacity(n);
        for i in 0..n {
            let (inf, sq) = row_norms(i, &effective[i * n..(i + 1) * n])?;
            row_inf_norms.push(inf);
            row_sq_norms.push(sq);
        }
        Ok(GramDataset {
            effective,
            kernel,
            n,
            d: n,
            y,
            row_inf_norms,
            row_sq_norms,
            width,
            bias_augmented: false,
        })
    }

    /// Appends a constant-1 column to the effective matrix; the weight
    /// vector gains a trailing bias entry excluded from the regularizer.
    pub fn augment_bias(&self) -> GramDataset {
        let d = self.d + 1;
        let mut effective = Vec::with_capacity(self.n * d);
        for i in 0..self.n {
            effective.extend_from_slice(self.effective_row(i));
            effective.push(1.0);
        }
        GramDataset {
            effective,
            kernel: self.kernel.clone(),
            n: self.n,
            d,
            y: self.y.clone(),
            row_inf_norms: self.row_inf_norms.iter().map(|&v| v.max(1.0)).collect(),
            row_sq_norms: self.row_sq_norms.iter().map(|&v| v + 1.0).collect(),
            width: self.width,
            bias_augmented: true,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Weight-vector length (`n`, plus one when bias-augmented).
    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn labels(&self) -> &[f64] {
        &self.y
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    pub fn is_bias_augmented(&self) -> bool {
        self.bias_augmented
    }

    pub fn row_inf_norms(&self) -> &[f64] {
        &self.row_inf_norms
    }

    pub fn row_sq_norms(&self) -> &[f64] {
        &self.row_sq_norms
    }

    pub fn effective_row(&self, i: usize) -> &[f64] {
        &self.effective[i * self.d..(i + 1) * self.d]
    }

    /// Entry of the raw (pre-scaling) kernel matrix.
    pub fn kernel_entry(&self, i: usize, j: usize) -> f64 {
        self.kernel[i * self.n + j]
    }

    pub fn max_sq_over_inf(&self) -> f64 {
        self.row_sq_norms
            .iter()
            .zip(&self.row_inf_norms)
            .map(|(&sq, &inf)| sq / inf)
            .fold(0.0, f64::max)
    }

    pub fn sum_sq_over_inf(&self) -> f64 {
        self.row_sq_norms
            .iter()
            .zip(&self.row_inf_norms)
            .map(|(&sq, &inf)| sq / inf)
            .sum()
    }

    pub fn max_row_sq(&self) -> f64 {
        self.row_sq_norms.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum_inf_norms(&self) -> f64 {
        self.row_inf_norms.iter().sum()
    }

    /// Margin vector over the effective matrix: `y_i * <A_i, w>`.
    pub fn margins(&self, w: &[f64]) -> Vec<f64> {
        assert_eq!(w.len(), self.d, "weight length must match effective dim");
        (0..self.n)
            .map(|i| {
                let row = self.effective_row(i);
                let dot: f64 = row.iter().zip(w).map(|(a, b)| a * b).sum();
                self.y[i] * dot
            })
            .collect()
    }

    /// `(YA)^T c` over the effective matrix.
    pub fn weighted_rows(&self, coef: &[f64]) -> Vec<f64> {
        assert_eq!(coef.len(), self.n);
        let mut out = vec![0.0; self.d];
        for (i, (&ci, &yi)) in coef.iter().zip(&self.y).enumerate() {
            let s = ci * yi;
            for (o, &v) in out.iter_mut().zip(self.effective_row(i)) {
                *o += s * v;
            }
        }
        out
    }

    /// `K alpha` over the first `n` weight entries (the bias entry, when
    /// present, does not enter the quadratic regularizer).
    pub fn kernel_times(&self, alpha: &[f64]) -> Vec<f64> {
        assert!(alpha.len() == self.d);
        self.kernel_times_raw(&alpha[..self.n])
    }

    /// `K v` for a plain length-`n` vector.
    pub fn kernel_times_raw(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.n);
        (0..self.n)
            .map(|i| {
                self.kernel[i * self.n..(i + 1) * self.n]
                    .iter()
                    .zip(v)
                    .map(|(k, x)| k * x)
                    .sum()
            })
            .collect()
    }

    /// Plain `A v` over the effective matrix (no label scaling).
    pub fn rows_times(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.d);
        (0..self.n)
            .map(|i| {
                self.effective_row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect()
    }

    /// Plain `A^T c` over the effective matrix.
    pub fn rows_transpose_times(&self, coef: &[f64]) -> Vec<f64> {
        assert_eq!(coef.len(), self.n);
        let mut out = vec![0.0; self.d];
        for (i, &s) in coef.iter().enumerate() {
            if s == 0.0 {
                continue;
            }
            for (o, &v) in out.iter_mut().zip(self.effective_row(i)) {
                *o += s * v;
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms_match_definitions() {
        let d = Dataset::from_samples(&[(vec![3.0, 4.0], 1.0)]).unwrap();
        assert_eq!(d.row_inf_norms(), &[4.0]);
        assert_eq!(d.row_sq_norms(), &[25.0]);
    }

    #[test]
    fn zero_row_rejected() {
        let err = Dataset::from_samples(&[(vec![0.0, 0.0], 1.0)]).unwrap_err();
        assert!(matches!(err, DataError::ZeroRow { row: 0 }));
    }

    #[test]
    fn multi_row_norms() {
        let d = Dataset::from_samples(&[(vec![1.0, -2.0], 1.0), (vec![0.5, 0.5], -1.0)]).unwrap();
        assert_eq!(d.row_inf_norms(), &[2.0, 0.5]);
        assert_eq!(d.row_sq_norms(), &[5.0, 0.5]);
    }

    #[test]
    fn bad_label_rejected() {
        let err = Dataset::from_samples(&[(vec![1.0], 2.0)]).unwrap_err();
        assert!(matches!(err, DataError::LabelOutOfRange { .. }));
    }

    #[test]
    fn empty_rejected() {
        assert!(matches!(
            Dataset::from_samples(&[]),
            Err(DataError::EmptyDataset)
        ));
    }

    #[test]
    fn ragged_rejected() {
        let err = Dataset::from_samples(&[(vec![1.0, 2.0], 1.0), (vec![1.0], -1.0)]).unwrap_err();
        assert!(matches!(err, DataError::RaggedRow { row: 1, .. }));
    }

    #[test]
    fn bias_appends_ones_last() {
        let d = Dataset::from_samples(&[(vec![3.0, 4.0], 1.0)]).unwrap();
        let b = d.augment_bias();
        assert_eq!(b.row(0), &[3.0, 4.0, 1.0]);
        assert_eq!(b.row_inf_norms(), &[4.0]);
        assert_eq!(b.row_sq_norms(), &[26.0]);
        assert!(b.is_bias_augmented());
    }

    #[test]
    fn bias_dominates_small_features() {
        let d = Dataset::from_samples(&[(vec![0.2], 1.0)]).unwrap();
        let b = d.augment_bias();
        assert_eq!(b.row(0), &[0.2, 1.0]);
        assert_eq!(b.row_inf_norms(), &[1.0]);
    }

    #[test]
    fn bias_multirow() {
        let d = Dataset::from_samples(&[(vec![-5.0, 2.0], 1.0), (vec![1.0, 1.0], -1.0)]).unwrap();
        let b = d.augment_bias();
        assert_eq!(b.row(0), &[-5.0, 2.0, 1.0]);
        assert_eq!(b.row(1), &[1.0, 1.0, 1.0]);
    }

    #[test]
    fn double_augment_yields_two_ones_columns() {
        let d = Dataset::from_samples(&[(vec![2.0], 1.0)]).unwrap();
        let twice = d.augment_bias().augment_bias();
        assert_eq!(twice.dim(), 3);
        assert_eq!(twice.row(0), &[2.0, 1.0, 1.0]);
    }

    #[test]
    fn margins_and_weighted_rows() {
        // X = [[1,0],[0,1]], y = [+1,-1]
        let d = Dataset::from_samples(&[(vec![1.0, 0.0], 1.0), (vec![0.0, 1.0], -1.0)]).unwrap();
        let m = d.margins(&[2.0, 3.0]);
        assert_eq!(m, vec![2.0, -3.0]);
        let g = d.weighted_rows(&[1.0, 1.0]);
        assert_eq!(g, vec![1.0, -1.0]);
    }

    #[test]
    fn rbf_identical_points_all_ones() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0), (vec![1.0], -1.0)]).unwrap();
        let g = GramDataset::rbf(&d, 1.0).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(g.kernel_entry(i, j), 1.0);
            }
        }
    }

    #[test]
    fn rbf_off_diagonal_value() {
        let d = Dataset::from_samples(&[(vec![0.0, 1.0], 1.0), (vec![1.0, 1.0], -1.0)]).unwrap();
        let g = GramDataset::rbf(&d, 1.0).unwrap();
        assert!((g.kernel_entry(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.kernel_entry(0, 0), 1.0);
        assert_eq!(g.kernel_entry(1, 1), 1.0);
    }

    #[test]
    fn rbf_effective_matrix_scales_columns_by_label() {
        let d = Dataset::from_samples(&[(vec![2.0], 1.0), (vec![1.0], -1.0)]).unwrap();
        let g = GramDataset::rbf(&d, 1.0).unwrap();
        let k01 = g.kernel_entry(0, 1);
        assert_eq!(g.effective_row(0)[0], 1.0); // K_00 * y_0 = 1 * +1
        assert_eq!(g.effective_row(0)[1], -k01); // K_01 * y_1
        assert_eq!(g.effective_row(1)[1], -1.0); // K_11 * y_1
    }

    #[test]
    fn nonpositive_width_rejected() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0)]).unwrap();
        assert!(matches!(
            GramDataset::rbf(&d, 0.0),
            Err(DataError::NonPositiveKernelWidth { .. })
        ));
    }

    #[test]
    fn kernel_times_matches_hand_product() {
        let d = Dataset::from_samples(&[(vec![2.0], 1.0), (vec![1.0], -1.0)]).unwrap();
        let g = GramDataset::rbf(&d, 1.0).unwrap();
        let k01 = g.kernel_entry(0, 1);
        let out = g.kernel_times(&[2.0, -1.0]);
        assert!((out[0] - (2.0 - k01)).abs() < 1e-15);
        assert!((out[1] - (2.0 * k01 - 1.0)).abs() < 1e-15);
    }
}
