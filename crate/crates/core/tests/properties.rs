//! Cross-module properties: convexity, Lipschitz sampling, approximation
//! sandwiches at the objective level, bias handling, and oracle agreement.

use psvm::data::{Dataset, GramDataset};
use psvm::models::{CurvatureBound, ModelSpec, Objective, SvmVariant, TrainData};
use psvm::oracle;
use psvm::smoothing;
use psvm::solver::{nesterov_step, SolverState};
use psvm::synth;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn specs_for(d: &Dataset) -> Vec<(ModelSpec, Dataset)> {
    let plain = d.clone();
    let with_bias = d.augment_bias();
    // LS-SVM uses the spectral curvature bound here: the per-row bound can
    // under-estimate the true Hessian norm on multi-row data (see
    // `lssvm_row_max_bound_can_under_estimate`).
    vec![
        (ModelSpec::csvm(1.5).with_mu(0.8), plain.clone()),
        (
            ModelSpec::csvm(1.5).with_mu(0.8).with_bias(true),
            with_bias.clone(),
        ),
        (
            ModelSpec::lpsvm(1.5).with_mu(0.6).with_nu(0.9),
            plain.clone(),
        ),
        (
            ModelSpec::lpsvm(1.5)
                .with_mu(0.6)
                .with_nu(0.9)
                .with_bias(true),
            with_bias.clone(),
        ),
        (
            ModelSpec::lssvm(1.5).with_curvature_bound(CurvatureBound::Spectral),
            plain,
        ),
        (
            ModelSpec::lssvm(1.5)
                .with_bias(true)
                .with_curvature_bound(CurvatureBound::Spectral),
            with_bias,
        ),
    ]
}

#[test]
fn lssvm_row_max_bound_can_under_estimate() {
    // Two identical rows double the quadratic curvature; the per-row bound
    // does not see that, so a gradient pair exceeding it must exist.
    let d = Dataset::from_samples(&[(vec![1.0], 1.0), (vec![1.0], 1.0)]).unwrap();
    let obj = Objective::new(TrainData::Linear(&d), ModelSpec::lssvm(1.0)).unwrap();
    let g0 = obj.eval(&[0.0]).unwrap().gradient[0];
    let g1 = obj.eval(&[1.0]).unwrap().gradient[0];
    let observed = (g1 - g0).abs();
    assert!(
        observed > obj.lipschitz() + 1e-9,
        "{observed} vs {}",
        obj.lipschitz()
    );
    let strict = Objective::new(
        TrainData::Linear(&d),
        ModelSpec::lssvm(1.0).with_curvature_bound(CurvatureBound::Spectral),
    )
    .unwrap();
    assert!(observed <= strict.lipschitz() * (1.0 + 1e-9));
}

#[test]
fn objectives_are_convex_along_random_segments() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let d = synth::random_labels_instance(8, 3, 5);
    for (spec, data) in specs_for(&d) {
        let obj = Objective::new(TrainData::Linear(&data), spec).unwrap();
        for _ in 0..200 {
            let w1: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let w2: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let t: f64 = rng.gen_range(0.0..1.0);
            let mid: Vec<f64> = w1
                .iter()
                .zip(&w2)
                .map(|(a, b)| t * a + (1.0 - t) * b)
                .collect();
            let f1 = obj.value(&w1).unwrap();
            let f2 = obj.value(&w2).unwrap();
            let fm = obj.value(&mid).unwrap();
            assert!(
                fm <= t * f1 + (1.0 - t) * f2 + 1e-12,
                "convexity violated: {fm} vs {}",
                t * f1 + (1.0 - t) * f2
            );
        }
    }
}

#[test]
fn assembled_gradient_satisfies_assembled_lipschitz() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let d = synth::random_labels_instance(10, 4, 6);
    for (spec, data) in specs_for(&d) {
        let obj = Objective::new(TrainData::Linear(&data), spec).unwrap();
        for _ in 0..200 {
            let w1: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let w2: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-3.0..3.0)).collect();
            let g1 = obj.eval(&w1).unwrap().gradient;
            let g2 = obj.eval(&w2).unwrap().gradient;
            let gd: f64 = g1
                .iter()
                .zip(&g2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let wd: f64 = w1
                .iter()
                .zip(&w2)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            assert!(
                gd <= obj.lipschitz() * wd * (1.0 + 1e-9) + 1e-12,
                "Lipschitz violated: {gd} vs {} * {wd}",
                obj.lipschitz()
            );
        }
    }
}

#[test]
fn csvm_objective_sandwiches_nonsmooth_objective() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let d = synth::random_labels_instance(12, 4, 7);
    for mu in [5.0, 1.0, 0.1, 0.01] {
        let spec = ModelSpec::csvm(2.0).with_mu(mu);
        let obj = Objective::new(TrainData::Linear(&d), spec.clone()).unwrap();
        let gap = spec.c * (mu / 2.0) * d.sum_inf_norms();
        for _ in 0..100 {
            let w: Vec<f64> = (0..d.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let smooth = obj.value(&w).unwrap();
            let exact = oracle::nonsmooth_objective(&d, &spec, &w);
            assert!(smooth <= exact + 1e-10);
            assert!(exact <= smooth + gap + 1e-10);
        }
    }
}

#[test]
fn bias_gradient_entry_carries_no_regularizer_term() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let d = synth::random_labels_instance(9, 3, 8).augment_bias();
    // For the quadratic-regularized variants the loss pullback is
    // -s * (YX)^T coef; the bias slot of the full gradient must equal that
    // pullback's bias slot exactly (no w_b term added).
    for spec in [
        ModelSpec::csvm(2.0).with_mu(0.7).with_bias(true),
        ModelSpec::lpsvm(2.0)
            .with_mu(0.7)
            .with_nu(0.9)
            .with_bias(true),
        ModelSpec::lssvm(2.0).with_bias(true),
    ] {
        let obj = Objective::new(TrainData::Linear(&d), spec.clone()).unwrap();
        for _ in 0..50 {
            let w: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let grad = obj.eval(&w).unwrap().gradient;
            let margins = d.margins(&w);
            let coef: Vec<f64> = match spec.variant {
                SvmVariant::CSvm => {
                    smoothing::hinge_dual_from_margins(&margins, d.row_inf_norms(), spec.mu)
                        .iter()
                        .map(|u| spec.c * u)
                        .collect()
                }
                SvmVariant::LpSvm => smoothing::hinge_dual_from_margins(
                    &margins,
                    d.row_inf_norms(),
                    spec.nu.unwrap(),
                )
                .iter()
                .map(|u| spec.c * u)
                .collect(),
                SvmVariant::LsSvm => margins.iter().map(|m| 2.0 * spec.c * (1.0 - m)).collect(),
            };
            let pullback = d.weighted_rows(&coef);
            let bias_slot = grad.len() - 1;
            assert_eq!(grad[bias_slot], -pullback[bias_slot]);
        }
    }
}

#[test]
fn next_iterate_is_exact_convex_combination() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for k0 in [0usize, 1, 7, 100] {
        let dim = 5;
        let mut state = SolverState::new((0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect());
        state.k = k0;
        state.grad_accum = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let eval = psvm::ObjectiveEval {
            value: 0.0,
            gradient: (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect(),
            lipschitz: 3.0,
        };
        let w_star: Vec<f64> = (0..dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        nesterov_step(&mut state, &eval, &w_star).unwrap();
        let cz = 2.0 / (k0 as f64 + 3.0);
        let cy = (k0 as f64 + 1.0) / (k0 as f64 + 3.0);
        for i in 0..dim {
            let rebuilt = cz * state.z[i] + cy * state.y[i];
            assert_eq!(state.w[i], rebuilt, "component {i} not bit-identical");
        }
    }
}

#[test]
fn dataset_norms_recompute_exactly() {
    let d = synth::planted_instance(40, 7, 0.2, 99);
    for i in 0..d.n() {
        let row = d.row(i);
        let inf = row.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let sq: f64 = row.iter().map(|v| v * v).sum();
        assert_eq!(d.row_inf_norms()[i], inf);
        assert_eq!(d.row_sq_norms()[i], sq);
    }
}

#[test]
fn rbf_kernel_matrix_is_positive_semidefinite() {
    // Shifted Cholesky: K + 1e-8 I factoring cleanly bounds the smallest
    // eigenvalue below by -1e-8.
    let d = synth::planted_instance(20, 3, 0.2, 123);
    let g = GramDataset::rbf(&d, 3.0).unwrap();
    let n = d.n();
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            a[i * n + j] = g.kernel_entry(i, j);
        }
        a[i * n + i] += 1e-8;
    }
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        assert!(diag > 0.0, "shifted kernel matrix not PD at column {j}");
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / diag;
        }
    }
    // Symmetry of the pre-scaling matrix is exact by construction.
    for i in 0..n {
        for j in 0..n {
            assert_eq!(g.kernel_entry(i, j), g.kernel_entry(j, i));
        }
    }
}

#[test]
fn saddle_max_tracks_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let grid = 20_000usize;
    for _ in 0..200 {
        let margin = rng.gen_range(-10.0..10.0);
        let inf: f64 = rng.gen_range(0.05..5.0);
        let mu: f64 = rng.gen_range(0.05..5.0);
        let brute = oracle::saddle_max(1.0 - margin, inf, mu, grid);
        let dual = smoothing::hinge_dual_at(margin, inf, mu);
        let closed = smoothing::hinge_value_at(margin, inf, mu, dual);
        assert!(
            (brute - closed).abs() <= 10.0 / grid as f64,
            "margin={margin} inf={inf} mu={mu}: brute {brute} vs closed {closed}"
        );
    }
}

#[test]
fn l1_saddle_max_tracks_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let grid = 20_000usize;
    for _ in 0..200 {
        let w = rng.gen_range(-5.0..5.0);
        let mu: f64 = rng.gen_range(0.05..5.0);
        let brute = oracle::l1_saddle_max(w, mu, grid);
        let closed = smoothing::l1_value_at(w, mu, smoothing::l1_dual_at(w, mu));
        assert!((brute - closed).abs() <= 10.0 / grid as f64);
    }
}

#[test]
fn smoothing_gradients_match_finite_differences_directly() {
    // Checks the smoothing-layer functions themselves, independent of the
    // objective assembly.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let d = synth::random_labels_instance(6, 3, 10);
    let mu = 0.8;
    let mut checked = 0;
    while checked < 50 {
        let w: Vec<f64> = (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if !oracle::hinge_kink_free(&d, &w, mu, 1e-3) {
            continue;
        }
        let duals = smoothing::hinge_dual(&d, &w, mu).unwrap();
        let analytic = smoothing::hinge_gradient(&d, &duals).unwrap();
        let fd = oracle::fd_gradient(
            |v| smoothing::hinge_value(&d, v, mu).unwrap(),
            &w,
            &oracle::FdSpec::default(),
        )
        .unwrap();
        for (a, b) in analytic.iter().zip(&fd) {
            assert!(
                (a - b).abs() <= 1e-6 * b.abs().max(1.0),
                "hinge gradient {a} vs fd {b}"
            );
        }
        checked += 1;
    }

    let mut checked = 0;
    while checked < 50 {
        let w: Vec<f64> = (0..4).map(|_| rng.gen_range(-3.0..3.0)).collect();
        if !oracle::l1_kink_free(&w, mu, 1e-3) {
            continue;
        }
        let analytic = smoothing::l1_gradient(&w, mu);
        let fd = oracle::fd_gradient(
            |v| smoothing::l1_value(v, mu),
            &w,
            &oracle::FdSpec::default(),
        )
        .unwrap();
        for (a, b) in analytic.iter().zip(&fd) {
            assert!(
                (a - b).abs() <= 1e-6 * b.abs().max(1.0),
                "l1 gradient {a} vs fd {b}"
            );
        }
        checked += 1;
    }
}

#[test]
fn concurrent_solves_share_data_and_agree() {
    use psvm::solver::{solve, SolverConfig};
    let d = synth::planted_instance(60, 6, 0.2, 11);
    let config = SolverConfig::default().with_epsilon(1e-8);
    let sequential: Vec<Vec<f64>> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&c| {
            let obj =
                Objective::new(TrainData::Linear(&d), ModelSpec::csvm(c).with_mu(1.0)).unwrap();
            solve(&obj, &config).unwrap().w
        })
        .collect();
    let parallel: Vec<Vec<f64>> = std::thread::scope(|scope| {
        let handles: Vec<_> = [0.5, 1.0, 2.0]
            .iter()
            .map(|&c| {
                let d = &d;
                let config = &config;
                scope.spawn(move || {
                    let obj = Objective::new(TrainData::Linear(d), ModelSpec::csvm(c).with_mu(1.0))
                        .unwrap();
                    solve(&obj, config).unwrap().w
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert_eq!(sequential, parallel);
}

#[test]
fn lpsvm_homotopy_schedules_both_smooth_parameters() {
    use psvm::solver::{solve_homotopy, HomotopyConfig, SolverConfig};
    let d = synth::planted_instance(20, 4, 0.2, 12);
    let spec = ModelSpec::lpsvm(1.0).with_mu(2.0).with_nu(3.0);
    let config = SolverConfig::default().with_epsilon(1e-4);
    let model = solve_homotopy(
        TrainData::Linear(&d),
        &spec,
        &config,
        &HomotopyConfig::new(2.0, 0.5),
    )
    .unwrap();
    assert_eq!(model.stages.len(), 4);
    for (t, stage) in model.stages.iter().enumerate() {
        assert!((stage.mu - 2.0 / (t as f64 + 1.0)).abs() < 1e-15);
        assert!((stage.nu.unwrap() - 3.0 / (t as f64 + 1.0)).abs() < 1e-15);
    }
}

#[test]
fn gram_objective_gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let d = synth::random_labels_instance(7, 3, 9);
    let g = GramDataset::rbf(&d, 3.0).unwrap();
    let spec = ModelSpec::csvm(1.2)
        .with_kernel(psvm::Kernel::Rbf { width: 3.0 })
        .with_mu(0.8);
    let obj = Objective::new(TrainData::Kernel(&g), spec.clone()).unwrap();
    let mut checked = 0;
    while checked < 20 {
        let alpha: Vec<f64> = (0..obj.dim()).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let margins = g.margins(&alpha);
        if !oracle::hinge_kink_free_margins(&margins, g.row_inf_norms(), spec.mu, 1e-3) {
            continue;
        }
        let analytic = obj.eval(&alpha).unwrap().gradient;
        let fd = oracle::fd_gradient(
            |v| obj.value(v).unwrap(),
            &alpha,
            &oracle::FdSpec::default(),
        )
        .unwrap();
        for (a, b) in analytic.iter().zip(&fd) {
            assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
        }
        checked += 1;
    }
}
