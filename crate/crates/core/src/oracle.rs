//! Independent verification machinery.
//!
//! Nothing here shares a code path with the solver it checks: gradients are
//! verified by central finite differences, the smoothed losses by brute
//! force maximization of their saddle objectives, LS-SVM by a dense
//! normal-equation solve, and the hinge-loss optimum by a long subgradient
//! run on the non-smooth objective.

use crate::data::Dataset;
use crate::models::{ModelSpec, SvmVariant};
use crate::smoothing;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("objective returned a non-finite value during finite differencing")]
    NonFiniteEvaluation,
    #[error("normal-equation system is numerically singular")]
    SingularSystem,
    #[error("subgradient reference supports hinge-loss variants only")]
    UnsupportedVariant,
}

/// Central-difference settings. The step is relative: coordinate `j` is
/// perturbed by `step * max(1, |w_j|)`.
#[derive(Debug, Clone, Copy)]
pub struct FdSpec {
    pub step: f64,
}

impl Default for FdSpec {
    fn default() -> Self {
        FdSpec { step: 1e-6 }
    }
}

/// Central-difference gradient of a scalar function.
pub fn fd_gradient(
    f: impl Fn(&[f64]) -> f64,
    w: &[f64],
    spec: &FdSpec,
) -> Result<Vec<f64>, OracleError> {
    let mut grad = Vec::with_capacity(w.len());
    let mut probe = w.to_vec();
    for j in 0..w.len() {
        let h = spec.step * w[j].abs().max(1.0);
        probe[j] = w[j] + h;
        let plus = f(&probe);
        probe[j] = w[j] - h;
        let minus = f(&probe);
        probe[j] = w[j];
        if !plus.is_finite() || !minus.is_finite() {
            return Err(OracleError::NonFiniteEvaluation);
        }
        grad.push((plus - minus) / (2.0 * h));
    }
    Ok(grad)
}

/// Brute-force maximization of the smoothed-hinge saddle objective
/// `u * margin_term - (mu/2) * inf_norm * u^2` over a grid on `[0, 1]`.
///
/// `margin_term` is `1 - y_i X_i w`. Converges to the closed form within
/// `O(1/grid_n)`.
pub fn saddle_max(margin_term: f64, inf_norm: f64, mu: f64, grid_n: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=grid_n {
        let u = i as f64 / grid_n as f64;
        let v = u * margin_term - 0.5 * mu * inf_norm * u * u;
        if v > best {
            best = v;
        }
    }
    best
}

/// Brute-force maximization of the smoothed-l1 saddle objective
/// `w * u - (mu/2) * u^2` over a grid on `[-1, 1]`.
pub fn l1_saddle_max(w: f64, mu: f64, grid_n: usize) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for i in 0..=grid_n {
        let u = -1.0 + 2.0 * i as f64 / grid_n as f64;
        let v = w * u - 0.5 * mu * u * u;
        if v > best {
            best = v;
        }
    }
    best
}

/// Direct LS-SVM solution via the normal equations
/// `(D + 2C X^T X) w = 2C X^T y` with `D` the regularizer diagonal
/// (identity, except a zero in the bias slot when `bias` is set).
///
/// This is the unique stationary point of the LS-SVM objective; the system
/// matrix is symmetric positive definite, solved by Cholesky.
pub fn lssvm_direct(d: &Dataset, c: f64, bias: bool) -> Result<Vec<f64>, OracleError> {
    let p = d.dim();
    let n = d.n();
    // A = D + 2C X^T X, column-major lower triangle is enough but keep it
    // dense and simple: p <= a few thousand by contract.
    let mut a = vec![0.0; p * p];
    for i in 0..n {
        let row = d.row(i);
        let s = 2.0 * c;
        for j in 0..p {
            let xj = row[j] * s;
            if xj == 0.0 {
                continue;
            }
            for k in 0..p {
                a[j * p + k] += xj * row[k];
            }
        }
    }
    for j in 0..p {
        let reg = if bias && j == p - 1 { 0.0 } else { 1.0 };
        a[j * p + j] += reg;
    }
    // rhs = 2C X^T y = 2C (YX)^T e.
    let ones = vec![1.0; n];
    let mut rhs = d.weighted_rows(&ones);
    for v in &mut rhs {
        *v *= 2.0 * c;
    }
    cholesky_solve(&mut a, p, &mut rhs)?;
    Ok(rhs)
}

/// In-place Cholesky factorization and solve for a dense SPD system.
fn cholesky_solve(a: &mut [f64], p: usize, b: &mut [f64]) -> Result<(), OracleError> {
    // Factor A = L L^T, storing L in the lower triangle.
    for j in 0..p {
        let mut diag = a[j * p + j];
        for k in 0..j {
            diag -= a[j * p + k] * a[j * p + k];
        }
        if diag <= 0.0 || !diag.is_finite() {
            return Err(OracleError::SingularSystem);
        }
        let diag = diag.sqrt();
        a[j * p + j] = diag;
        for i in (j + 1)..p {
            let mut v = a[i * p + j];
            for k in 0..j {
                v -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = v / diag;
        }
    }
    // Forward solve L t = b.
    for i in 0..p {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * p + k] * b[k];
        }
        b[i] = v / a[i * p + i];
    }
    // Back solve L^T x = t.
    for i in (0..p).rev() {
        let mut v = b[i];
        for k in (i + 1)..p {
            v -= a[k * p + i] * b[k];
        }
        b[i] = v / a[i * p + i];
    }
    Ok(())
}

/// The non-smooth objective the smoothing approximates: exact hinge loss
/// plus the exact regularizer of the variant.
pub fn nonsmooth_objective(d: &Dataset, spec: &ModelSpec, w: &[f64]) -> f64 {
    let margins = d.margins(w);
    let hinge: f64 = margins.iter().map(|&m| smoothing::hinge_exact(m)).sum();
    let reg_len = if spec.bias { w.len() - 1 } else { w.len() };
    match spec.variant {
        SvmVariant::CSvm => 0.5 * w[..reg_len].iter().map(|v| v * v).sum::<f64>() + spec.c * hinge,
        SvmVariant::LpSvm => w[..reg_len].iter().map(|v| v.abs()).sum::<f64>() + spec.c * hinge,
        SvmVariant::LsSvm => {
            let quad: f64 = margins.iter().map(|&m| (1.0 - m) * (1.0 - m)).sum();
            0.5 * w[..reg_len].iter().map(|v| v * v).sum::<f64>() + spec.c * quad
        }
    }
}

/// Long-run subgradient descent on the non-smooth objective; the slow
/// reference minimizer. Returns the best iterate seen.
///
/// C-SVM uses the classic `1/k` step from the unit strong convexity of the
/// quadratic regularizer; LP-SVM falls back to a diminishing `1/sqrt(k)`
/// schedule.
pub fn subgradient_reference(
    d: &Dataset,
    spec: &ModelSpec,
    iterations: usize,
) -> Result<Vec<f64>, OracleError> {
    if spec.variant == SvmVariant::LsSvm {
        return Err(OracleError::UnsupportedVariant);
    }
    let p = d.dim();
    let mut w = vec![0.0; p];
    let mut best = w.clone();
    let mut best_value = nonsmooth_objective(d, spec, &w);
    let reg_len = if spec.bias { p - 1 } else { p };
    for k in 1..=iterations {
        let margins = d.margins(&w);
        // Active hinge terms contribute -C y_i X_i.
        let active: Vec<f64> = margins
            .iter()
            .map(|&m| if m < 1.0 { 1.0 } else { 0.0 })
            .collect();
        let pulled = d.weighted_rows(&active);
        let mut g: Vec<f64> = match spec.variant {
            SvmVariant::CSvm => w.clone(),
            SvmVariant::LpSvm => w.iter().map(|&v| v.signum()).collect(),
            SvmVariant::LsSvm => unreachable!(),
        };
        if spec.bias {
            g[reg_len] = 0.0;
        }
        for (gv, &pv) in g.iter_mut().zip(&pulled) {
            *gv -= spec.c * pv;
        }
        let step = match spec.variant {
            SvmVariant::CSvm => 1.0 / k as f64,
            _ => 0.5 / (k as f64).sqrt(),
        };
        for (wv, &gv) in w.iter_mut().zip(&g) {
            *wv -= step * gv;
        }
        let value = nonsmooth_objective(d, spec, &w);
        if value < best_value {
            best_value = value;
            best = w.clone();
        }
    }
    Ok(best)
}

/// True when every margin is at least `clearance` away from both hinge
/// branch boundaries (`m = 1` and `m = 1 - mu ||X_i||_inf`), so central
/// differences of the smoothed objective are trustworthy.
pub fn hinge_kink_free_margins(
    margins: &[f64],
    inf_norms: &[f64],
    mu: f64,
    clearance: f64,
) -> bool {
    margins
        .iter()
        .zip(inf_norms)
        .all(|(&m, &a)| (m - 1.0).abs() > clearance && (m - (1.0 - mu * a)).abs() > clearance)
}

/// [`hinge_kink_free_margins`] evaluated at a weight vector on a dataset.
pub fn hinge_kink_free(d: &Dataset, w: &[f64], mu: f64, clearance: f64) -> bool {
    hinge_kink_free_margins(&d.margins(w), d.row_inf_norms(), mu, clearance)
}

/// True when every coordinate of `w` is at least `clearance` away from the
/// smoothed-l1 branch boundaries at `|w_j| = mu`.
pub fn l1_kink_free(w: &[f64], mu: f64, clearance: f64) -> bool {
    w.iter().all(|&v| (v.abs() - mu).abs() > clearance)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_exact_on_quadratic() {
        let g = fd_gradient(
            |w| 0.5 * w.iter().map(|v| v * v).sum::<f64>(),
            &[3.0],
            &FdSpec::default(),
        )
        .unwrap();
        assert!((g[0] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn fd_polynomial_machine_level() {
        // f(w) = w0^2 + 2 w0 w1: central differences are exact on quadratics
        // up to rounding.
        let f = |w: &[f64]| w[0] * w[0] + 2.0 * w[0] * w[1];
        let g = fd_gradient(f, &[1.5, -2.0], &FdSpec::default()).unwrap();
        assert!((g[0] - (2.0 * 1.5 + 2.0 * -2.0)).abs() < 1e-8);
        assert!((g[1] - 3.0).abs() < 1e-8);
    }

    #[test]
    fn fd_flags_nonfinite() {
        let f = |w: &[f64]| if w[0] > 1.0 { f64::NAN } else { w[0] };
        assert!(matches!(
            fd_gradient(f, &[1.0], &FdSpec { step: 0.5 }),
            Err(OracleError::NonFiniteEvaluation)
        ));
    }

    #[test]
    fn saddle_max_matches_quadratic_branch() {
        let v = saddle_max(1.0, 1.0, 5.0, 100_000);
        assert!((v - 0.1).abs() < 1e-5);
    }

    #[test]
    fn saddle_max_satisfied_margin() {
        assert_eq!(saddle_max(-1.0, 1.0, 5.0, 10_000), 0.0);
    }

    #[test]
    fn saddle_max_boundary_maximizer() {
        let v = saddle_max(11.0, 1.0, 1.0, 100_000);
        assert!((v - 10.5).abs() < 1e-4);
    }

    #[test]
    fn lssvm_direct_one_dim() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0)]).unwrap();
        let w = lssvm_direct(&d, 1.0, false).unwrap();
        assert!((w[0] - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn lssvm_direct_small_c_shrinks_to_zero() {
        let d = Dataset::from_samples(&[(vec![1.0, 2.0], 1.0), (vec![2.0, 1.0], -1.0)]).unwrap();
        let w = lssvm_direct(&d, 1e-9, false).unwrap();
        assert!(w.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn lssvm_direct_symmetric_pair() {
        // X = [[1], [-1]], y = [+1, -1]: w = 4C / (1 + 4C).
        let d = Dataset::from_samples(&[(vec![1.0], 1.0), (vec![-1.0], -1.0)]).unwrap();
        for c in [0.1, 1.0, 10.0] {
            let w = lssvm_direct(&d, c, false).unwrap();
            assert!((w[0] - 4.0 * c / (1.0 + 4.0 * c)).abs() < 1e-12);
        }
    }

    #[test]
    fn lssvm_direct_zeroes_the_gradient() {
        let d = Dataset::from_samples(&[
            (vec![1.0, 0.3], 1.0),
            (vec![-0.4, 1.1], -1.0),
            (vec![0.9, -0.8], 1.0),
        ])
        .unwrap();
        let c = 2.5;
        let w = lssvm_direct(&d, c, false).unwrap();
        let eval = crate::models::eval_lssvm(&d, &w, &ModelSpec::lssvm(c)).unwrap();
        for g in eval.gradient {
            assert!(g.abs() < 1e-10, "gradient entry {g}");
        }
    }

    #[test]
    fn subgradient_zero_iterations_returns_start() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0)]).unwrap();
        let w = subgradient_reference(&d, &ModelSpec::csvm(1.0), 0).unwrap();
        assert_eq!(w, vec![0.0]);
    }

    #[test]
    fn subgradient_best_iterate_monotone() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0), (vec![-0.7], -1.0)]).unwrap();
        let spec = ModelSpec::csvm(2.0);
        let mut prev = f64::INFINITY;
        for iters in [0usize, 10, 100, 1000] {
            let w = subgradient_reference(&d, &spec, iters).unwrap();
            let v = nonsmooth_objective(&d, &spec, &w);
            assert!(v <= prev + 1e-12);
            prev = v;
        }
    }

    #[test]
    fn subgradient_rejects_lssvm() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0)]).unwrap();
        assert!(matches!(
            subgradient_reference(&d, &ModelSpec::lssvm(1.0), 5),
            Err(OracleError::UnsupportedVariant)
        ));
    }

    #[test]
    fn kink_detection() {
        let d = Dataset::from_samples(&[(vec![1.0], 1.0)]).unwrap();
        // w = 1 puts the margin exactly at the zero/quadratic boundary.
        assert!(!hinge_kink_free(&d, &[1.0], 1.0, 1e-3));
        assert!(hinge_kink_free(&d, &[0.5], 1.0, 1e-3));
        assert!(!l1_kink_free(&[1.0], 1.0, 1e-3));
        assert!(l1_kink_free(&[0.5], 1.0, 1e-3));
    }
}
