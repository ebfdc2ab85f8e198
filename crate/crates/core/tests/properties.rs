use faer::{c64, Mat};
use frame_recon::eval::*;
use frame_recon::frame::*;
use frame_recon::kernels::*;
use frame_recon::numerics::*;
use frame_recon::operators::*;
use frame_recon::patterns::*;
use proptest::prelude::*;

fn complex_matrix(rows: usize, cols: usize, vals: &[f64]) -> Mat<c64> {
    Mat::from_fn(rows, cols, |i, j| {
        let k = 2 * (i * cols + j);
        c64::new(vals[k], vals[k + 1])
    })
}

fn max_abs(m: &Mat<c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

fn small_nodes() -> impl Strategy<Value = Vec<Node2>> {
    prop::collection::vec((-6.0..6.0f64, -6.0..6.0f64), 2..24)
        .prop_map(|v| v.into_iter().map(|(a, b)| Node2::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn pseudo_inverse_satisfies_penrose_identities(
        rows in 1usize..7,
        cols in 1usize..7,
        vals in prop::collection::vec(-1.0..1.0f64, 72),
    ) {
        let a = complex_matrix(rows, cols, &vals);
        let svd = RectMatrix::new(a.clone()).unwrap().svd().unwrap();
        let x = svd.pinv_apply_mat(Mat::<c64>::identity(rows, rows).as_ref(), 1e-12).unwrap().x;
        let scale = max_abs(&a).max(1.0);
        let axa = &a * &x * &a;
        let xax = &x * &a * &x;
        prop_assert!(max_abs(&(&axa - &a)) <= 1e-9 * scale);
        prop_assert!(max_abs(&(&xax - &x)) <= 1e-9 * max_abs(&x).max(1.0));
        let ax = &a * &x;
        let xa = &x * &a;
        prop_assert!(max_abs(&(&ax - ax.adjoint().to_owned())) <= 1e-9);
        prop_assert!(max_abs(&(&xa - xa.adjoint().to_owned())) <= 1e-9);
    }

    #[test]
    fn min_eigenvalue_is_negated_max_of_negation(
        dim in 1usize..8,
        vals in prop::collection::vec(-1.0..1.0f64, 128),
    ) {
        let b = complex_matrix(dim, dim, &vals);
        let h = HermitianMatrix::new(&b + b.adjoint().to_owned()).unwrap();
        let neg = HermitianMatrix::new(-h.as_mat().to_owned()).unwrap();
        let lo = min_eigenvalue(&h).unwrap();
        let hi_neg = max_eigenvalue(&neg).unwrap();
        prop_assert!((lo + hi_neg).abs() <= 1e-12 * (1.0 + lo.abs()));
    }

    #[test]
    fn sampling_gram_is_psd_and_permutation_invariant(nodes in small_nodes(), shift in 0usize..100) {
        let g = assemble_gram_for_nodes(&nodes).unwrap();
        let ev = g.eigenvalues().unwrap();
        let top = ev[ev.len() - 1];
        prop_assert!(ev[0] >= -1e-12 * top);
        prop_assert!((ev.iter().sum::<f64>() - 4.0 * nodes.len() as f64).abs() <= 1e-9 * nodes.len() as f64);

        let k = nodes.len();
        let perm: Vec<usize> = (0..k).map(|i| (i + shift) % k).rev().collect();
        let reordered: Vec<Node2> = perm.iter().map(|&i| nodes[i]).collect();
        let ev2 = assemble_gram_for_nodes(&reordered).unwrap().eigenvalues().unwrap();
        for (a, b) in ev.iter().zip(&ev2) {
            prop_assert!((a - b).abs() <= 1e-10 * top.max(1.0));
        }
        let permuted = g.permuted(&perm).unwrap();
        for i in 0..k {
            for j in 0..k {
                prop_assert!((permuted.get(i, j) - g.get(perm[i], perm[j])).norm() == 0.0);
            }
        }
    }

    #[test]
    fn jitter_stays_within_bound(side in 1usize..12, bound in 0.0..0.25f64, seed in any::<u64>()) {
        let p = generate_jittered(JitterParams { m1: side, m2: side, bound }, seed).unwrap();
        let idx = p.grid_indices().unwrap();
        for (node, j) in p.nodes().iter().zip(&idx) {
            prop_assert!((node.lambda1 - j[0] as f64).abs() <= bound);
            prop_assert!((node.lambda2 - j[1] as f64).abs() <= bound);
        }
        prop_assert!(p.warnings().is_empty());
    }

    #[test]
    fn frame_bounds_are_ordered_and_scale_with_repetition(seed in 0u64..1000, bound in 0.0..0.25f64) {
        let p = generate_jittered(JitterParams { m1: 8, m2: 8, bound }, seed).unwrap();
        let grid = IndexGrid::square(4).unwrap();
        let fb = estimate_frame_bounds(&p, grid).unwrap();
        prop_assert!(fb.a > 0.0 && fb.a <= fb.b);
        let twice = estimate_frame_bounds(&p.doubled(), grid).unwrap();
        prop_assert!((twice.a - 2.0 * fb.a).abs() <= 1e-9 * fb.b);
        prop_assert!((twice.b - 2.0 * fb.b).abs() <= 1e-9 * fb.b);
    }

    #[test]
    fn af_solution_is_linear_in_the_data(
        seed in 0u64..1000,
        alpha in -3.0..3.0f64,
        beta in -3.0..3.0f64,
    ) {
        let p = preset(PatternKind::Jittered, 8, seed).unwrap();
        let d1 = frame_coefficients(TestFunction::F1, &p);
        let d2 = frame_coefficients(TestFunction::F2, &p);
        let k = c64::new(alpha, beta);
        let mixed: Vec<c64> = d1.iter().zip(&d2).map(|(a, b)| k * a + b).collect();
        let n = (4, 4);
        let c1 = af_reconstruct(&d1, &p, n, DEFAULT_REL_TOL).unwrap().coefficients;
        let c2 = af_reconstruct(&d2, &p, n, DEFAULT_REL_TOL).unwrap().coefficients;
        let cm = af_reconstruct(&mixed, &p, n, DEFAULT_REL_TOL).unwrap().coefficients;
        for ((a, b), m) in c1.iter().zip(&c2).zip(&cm) {
            prop_assert!((k * a + b - m).norm() <= 1e-9 * (1.0 + k.norm()));
        }
    }
}

#[test]
fn methods_agree_on_the_integer_grid() {
    let p = generate_integer_grid(12, 12).unwrap();
    let grid = EvalGrid::new(48, 48).unwrap();
    for f in [TestFunction::F1, TestFunction::F2] {
        for n in [4usize, 8, 12] {
            let plan = TruncationPlan {
                n: (n, n),
                ..plan_for(&p, 12, ConstantsMode::Preset, MRule::Consistent).unwrap()
            };
            let af = reconstruct(f, Method::Af, &p, &plan, DEFAULT_REL_TOL, grid).unwrap();
            let cc = reconstruct(f, Method::Cc, &p, &plan, DEFAULT_REL_TOL, grid).unwrap();
            assert!(!cc.diagnostics.singular);
            let diff = af.grid_values.iter().zip(&cc.grid_values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff <= 1e-8, "{f} n={n}: {diff:e}");
        }
    }
}
