use ctrlnet::dynamics::{Activation, ControlSchedule};
use ctrlnet::meanfield::{
    fv_step_with_balance, solve_meanfield, wasserstein1, wasserstein1_cdf, Density1D,
    GaussianSpread, SampleSet,
};
use ctrlnet::optimize::{pgd, project, BoxDomain, PgdOptions};
use ctrlnet::surrogate::{fit_interpolation, kernel_matrix, surrogate_eval, AxisScale, ParamPoint};
use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

fn sample_set() -> impl Strategy<Value = SampleSet> {
    prop::collection::vec(-5.0..5.0f64, 1..40).prop_map(|v| SampleSet::new(v).unwrap())
}

fn distinct_nodes() -> impl Strategy<Value = Vec<ParamPoint>> {
    prop::collection::btree_set((0u32..26, 0u32..26), 2..15).prop_map(|set| {
        set.into_iter()
            .map(|(i, j)| ParamPoint::new(i as f64 * 1e-2, j as f64 * 1e-4))
            .collect()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn upwind_keeps_cells_nonnegative(
        cells in prop::collection::vec(0.0..5.0f64, 5..40),
        w in 0.0..0.25f64,
        b in 0.0..2.5e-3f64,
        act in prop::sample::select(vec![Activation::Relu, Activation::Tanh, Activation::Identity]),
    ) {
        prop_assume!(cells.iter().any(|c| *c > 0.0));
        let mut rho = Density1D::new(0.0, 3.0, cells).unwrap();
        for _ in 0..50 {
            let (next, balance) = fv_step_with_balance(&rho, w, b, act, 1e-2).unwrap();
            prop_assert!(next.cells().iter().all(|c| *c >= 0.0));
            prop_assert!(balance.relative_defect() <= 1e-12);
            prop_assert!(next.mass() <= rho.mass() * (1.0 + 1e-14));
            rho = next;
        }
    }

    #[test]
    fn w1_is_a_metric(a in sample_set(), b in sample_set(), c in sample_set()) {
        prop_assert_eq!(wasserstein1(&a, &a), 0.0);
        let ab = wasserstein1(&a, &b);
        prop_assert!(ab >= 0.0);
        prop_assert!((ab - wasserstein1(&b, &a)).abs() <= 1e-12 * (1.0 + ab));
        prop_assert!(ab <= wasserstein1(&a, &c) + wasserstein1(&c, &b) + 1e-12);
        prop_assert!((ab - wasserstein1_cdf(&a, &b)).abs() <= 1e-10 * (1.0 + ab));
    }

    #[test]
    fn shifting_samples_moves_w1_by_the_shift(a in sample_set(), shift in -3.0..3.0f64) {
        let moved = SampleSet::new(a.points().iter().map(|x| x + shift).collect()).unwrap();
        prop_assert!((wasserstein1(&a, &moved) - shift.abs()).abs() <= 1e-12);
    }

    #[test]
    fn kernel_matrix_is_positive_semidefinite(nodes in distinct_nodes(), gamma in 1e-3..1.0f64) {
        let k = kernel_matrix(&nodes, gamma, AxisScale::default());
        prop_assert!(k == k.transpose());
        let n = nodes.len() as f64;
        for ev in k.symmetric_eigenvalues().iter() {
            prop_assert!(*ev >= -1e-12 * n, "eigenvalue {}", ev);
        }
    }

    #[test]
    fn interpolation_reproduces_node_values(nodes in distinct_nodes(), seed in 0u64..1000) {
        let values: Vec<f64> = nodes.iter().enumerate().map(|(i, p)| 1.0 + p.w + ((seed + i as u64) % 7) as f64 * 0.1).collect();
        let s = fit_interpolation(&nodes, &values, 1e-2).unwrap();
        prop_assume!(s.jitter() == 0.0);
        for (p, z) in nodes.iter().zip(&values) {
            prop_assert!((surrogate_eval(&s, *p) - z).abs() <= 1e-8 * z.abs());
        }
    }

    #[test]
    fn projection_is_idempotent(w in -1.0..1.0f64, b in -1.0..1.0f64) {
        let domain = BoxDomain::new(0.0, 0.25, 0.0, 2.5e-3).unwrap();
        let once = project(ParamPoint::new(w, b), &domain);
        prop_assert!(domain.contains(once));
        prop_assert_eq!(project(once, &domain), once);
        if domain.contains(ParamPoint::new(w, b)) {
            prop_assert_eq!(once, ParamPoint::new(w, b));
        }
    }

    #[test]
    fn descent_never_leaves_the_box(cw in -2.0..2.0f64, cb in -2.0..2.0f64, step in 1e-3..0.4f64) {
        let domain = BoxDomain::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let f = move |p: ParamPoint| (p.w - cw).powi(2) + (p.b - cb).powi(2);
        let g = move |p: ParamPoint| [2.0 * (p.w - cw), 2.0 * (p.b - cb)];
        let options = PgdOptions { step, max_iters: 200, ..PgdOptions::default() };
        let trace = pgd(f, g, ParamPoint::new(0.5, 0.5), &domain, options).unwrap();
        prop_assert!(trace.iterates.iter().all(|(p, _)| domain.contains(*p)));
        prop_assert!(trace.iterates.windows(2).all(|w| w[1].1 <= w[0].1));
    }
}

/// Normalised distribution function on `[0, 3]` of the Gaussian initial law
/// pushed through `x' = w x + b` up to time 1, with zero inflow at `x = 0`.
fn exact_cdf(w: f64, b: f64, mean: f64, std: f64) -> impl Fn(f64) -> f64 {
    let normal = Normal::new(mean, std).unwrap();
    let back = move |x: f64| (x + b / w) * (-w).exp() - b / w;
    let lo = normal.cdf(0.0);
    let total = normal.cdf(back(3.0)) - lo;
    move |x: f64| (normal.cdf(back(x).max(0.0)) - lo) / total
}

fn cdf_distance(rho: &Density1D, exact: &dyn Fn(f64) -> f64) -> f64 {
    let n = 30_000;
    let h = 3.0 / n as f64;
    (0..n)
        .map(|i| (i as f64 + 0.5) * h)
        .map(|x| (rho.cdf(x) - exact(x)).abs())
        .sum::<f64>()
        * h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn refining_cells_approaches_the_exact_push_forward(w in 0.01..0.25f64, b in 0.0..2.5e-3f64) {
        let ctrl = ControlSchedule::scalar(w, b, 0.0, 1.0, 1e-2).unwrap();
        let spread = GaussianSpread::Variance(0.1);
        let exact = exact_cdf(w, b, 1.5, spread.std_dev());
        let errors: Vec<f64> = [30, 60, 120]
            .iter()
            .map(|&cells| {
                let rho0 = Density1D::gaussian(0.0, 3.0, cells, 1.5, spread).unwrap();
                cdf_distance(&solve_meanfield(&rho0, &ctrl, Activation::Relu).unwrap(), &exact)
            })
            .collect();
        prop_assert!(errors[1] < errors[0] && errors[2] < errors[1], "{:?}", errors);
    }
}
