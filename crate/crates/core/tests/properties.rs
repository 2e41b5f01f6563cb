//! Property tests for the invariants of each module.

mod common;

use common::*;
use ou_intervene::matkit::{
    cholesky, expm, kron, principal_submatrix, rank, default_rank_tol, solve_linear, solve_lyapunov,
};
use ou_intervene::simulate::exact_transition;
use ou_intervene::stability::{
    diagonal_lyapunov_certificate, lyapunov_certificate, screen_principal_submatrices,
    verify_diagonal_certificate, Basis, DEFAULT_SUBSET_BUDGET,
};
use ou_intervene::stationary::{controllability_rank, default_horizon, lyapunov_residual};
use ou_intervene::*;
use proptest::prelude::*;
use rand::Rng;

fn square(n: usize, bound: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-bound..bound, n * n).prop_map(move |v| Matrix::from_vec(n, n, v).unwrap())
}

fn sized_square(lo: usize, hi: usize, bound: f64) -> impl Strategy<Value = Matrix> {
    (lo..=hi).prop_flat_map(move |n| square(n, bound))
}

fn taylor_expm(m: &Matrix) -> Matrix {
    let n = m.rows();
    let mut term = Matrix::identity(n);
    let mut sum = Matrix::identity(n);
    for k in 1..40 {
        term = (&term * m).scale(1.0 / k as f64);
        sum = &sum + &term;
    }
    sum
}

fn rel_gap(a: &Matrix, b: &Matrix) -> f64 {
    (a - b).max_abs() / b.max_abs().max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn solve_residual_is_small(m in sized_square(1, 6, 1.0), rhs in prop::collection::vec(-1.0f64..1.0, 6)) {
        let n = m.rows();
        // Adding n to the diagonal bounds the condition number.
        let a = &m + &Matrix::identity(n).scale(n as f64);
        let b = Matrix::column(&rhs[..n]);
        let x = solve_linear(&a, &b).unwrap();
        let r = (&(&a * &x) - &b).max_abs();
        prop_assert!(r <= 1e-10 * (a.norm_inf() * x.max_abs()).max(1.0));
    }

    #[test]
    fn expm_semigroup(m in sized_square(1, 5, 1.0), s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let es = expm(&m.scale(s)).unwrap();
        let et = expm(&m.scale(t)).unwrap();
        let est = expm(&m.scale(s + t)).unwrap();
        prop_assert!(rel_gap(&(&es * &et), &est) <= 1e-9);
    }

    #[test]
    fn expm_agrees_with_taylor_series(m in sized_square(1, 5, 0.3)) {
        prop_assert!(rel_gap(&expm(&m).unwrap(), &taylor_expm(&m)) <= 1e-12);
    }

    #[test]
    fn expm_of_negation_is_inverse(m in sized_square(1, 5, 1.0)) {
        let n = m.rows();
        let prod = &expm(&m).unwrap() * &expm(&m.scale(-1.0)).unwrap();
        prop_assert!((&prod - &Matrix::identity(n)).max_abs() <= 1e-10);
    }

    #[test]
    fn cholesky_recovers_factor(raw in sized_square(1, 6, 1.0)) {
        let n = raw.rows();
        let mut l = Matrix::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                l[(i, j)] = raw[(i, j)];
            }
            l[(i, i)] = 0.5 + raw[(i, i)].abs();
        }
        let got = cholesky(&(&l * &l.transpose())).unwrap();
        prop_assert!((&got - &l).max_abs() <= 1e-10);
    }

    #[test]
    fn identity_noise_is_controllable(b in sized_square(1, 6, 3.0)) {
        prop_assert_eq!(controllability_rank(&b, &Matrix::identity(b.rows())), b.rows());
    }

    #[test]
    fn rank_of_outer_product_is_one(u in prop::collection::vec(0.5f64..2.0, 4), v in prop::collection::vec(0.5f64..2.0, 3)) {
        let m = &Matrix::column(&u) * &Matrix::column(&v).transpose();
        prop_assert_eq!(rank(&m, default_rank_tol(&m)), 1);
    }

    #[test]
    fn submatrix_commutes_with_transpose(m in square(5, 1.0), mask in 0u8..31) {
        let removed: Vec<usize> = (0..5).filter(|i| mask & (1 << i) != 0).collect();
        let a = principal_submatrix(&m, &removed).unwrap().transpose();
        let b = principal_submatrix(&m.transpose(), &removed).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn kron_mixed_product(a in square(2, 1.0), b in square(3, 1.0), c in square(2, 1.0), d in square(3, 1.0)) {
        let lhs = &kron(&a, &b) * &kron(&c, &d);
        let rhs = kron(&(&a * &c), &(&b * &d));
        prop_assert!((&lhs - &rhs).max_abs() <= 1e-12);
    }

    #[test]
    fn lyapunov_solution_satisfies_equation(seed in any::<u64>(), p in 1usize..=5) {
        let mut r = rng(seed);
        let b = stable_matrix(&mut r, p);
        let s = uniform_matrix(&mut r, p, p, -1.0, 1.0);
        let q = &s * &s.transpose();
        let x = solve_lyapunov(&b, &q).unwrap();
        let bx = &b * &x;
        let res = (&(&bx + &bx.transpose()) + &q).max_abs();
        prop_assert!(res <= 1e-10 * (b.max_abs() * x.max_abs()).max(q.max_abs()).max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn intervened_drift_is_substituted_drift(seed in any::<u64>(), p in 2usize..=5) {
        let mut r = rng(seed);
        let model = OuModel::new(
            uniform_vec(&mut r, p, -1.0, 1.0),
            uniform_vec(&mut r, p, -2.0, 2.0),
            stable_matrix(&mut r, p),
            uniform_matrix(&mut r, p, 2, -1.0, 1.0),
        ).unwrap();
        let m = r.random_range(1..=p);
        let c = r.random_range(-3.0..3.0);
        let (reduced, record) = intervene_ou(&model, Intervention::new(m, c)).unwrap();
        prop_assert_eq!(reduced.p(), p - 1);
        prop_assert_eq!(record.fixed(), vec![(model.labels()[m - 1].clone(), c)]);
        for _ in 0..20 {
            let y = uniform_vec(&mut r, p - 1, -3.0, 3.0);
            prop_assert!(max_abs_diff(&reduced.drift(&y), &substituted_drift(&model, m - 1, c, &y)) <= 1e-10);
        }
    }

    #[test]
    fn general_intervention_matches_ou(seed in any::<u64>(), p in 2usize..=5) {
        let mut r = rng(seed);
        let model = OuModel::new(
            uniform_vec(&mut r, p, -1.0, 1.0),
            uniform_vec(&mut r, p, -2.0, 2.0),
            stable_matrix(&mut r, p),
            uniform_matrix(&mut r, p, 3, -1.0, 1.0),
        ).unwrap();
        let iv = Intervention::new(r.random_range(1..=p), r.random_range(-2.0..2.0));
        let (reduced, _) = intervene_ou(&model, iv).unwrap();
        let via_ou = GeneralSde::from_ou(&reduced);
        let via_general = intervene_general(&GeneralSde::from_ou(&model), iv).unwrap();
        for _ in 0..20 {
            let y = uniform_vec(&mut r, p - 1, -3.0, 3.0);
            prop_assert!((&via_ou.coefficient(&y) - &via_general.coefficient(&y)).max_abs() <= 1e-12);
        }
    }

    #[test]
    fn sequential_interventions_commute(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = 4;
        let model = OuModel::new(
            vec![0.0; p],
            uniform_vec(&mut r, p, -2.0, 2.0),
            stable_matrix(&mut r, p),
            Matrix::identity(p),
        ).unwrap();
        let a = Intervention::new(1, r.random_range(-2.0..2.0));
        let b = Intervention::new(3, r.random_range(-2.0..2.0));
        let (ab, _) = intervene_seq(&model, &[a, b]).unwrap();
        let (ba, _) = intervene_seq(&model, &[b, a]).unwrap();
        prop_assert!((ab.speed() - ba.speed()).max_abs() <= 1e-12);
        prop_assert!(max_abs_diff(ab.level(), ba.level()) <= 1e-10);
    }

    #[test]
    fn graph_edges_follow_nonzero_speed_entries(b in square(4, 1.0), mask in prop::collection::vec(any::<bool>(), 16)) {
        let rows: Vec<Vec<f64>> = (0..4)
            .map(|i| (0..4).map(|j| if mask[4 * i + j] { b[(i, j)] } else { 0.0 }).collect())
            .collect();
        let speed = Matrix::from_rows(&rows).unwrap();
        let labels: Vec<String> = (1..=4).map(|i| format!("X{i}")).collect();
        let g = DependenceGraph::from_speed(&speed, &labels, 0.0);
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(g.has_edge(&labels[j], &labels[i]), speed[(i, j)] != 0.0);
            }
        }
        let pinned = g.with_intervention(2);
        prop_assert!(pinned.edges().iter().all(|&(_, to)| to != 1));
    }

    #[test]
    fn stability_agrees_with_abscissa_sign(b in sized_square(2, 4, 3.0)) {
        let a = spectral_abscissa(&b, 1e-9);
        // Near-zero abscissae are left to the classification tolerance.
        prop_assume!(a.abs() > 1e-6);
        prop_assert_eq!(is_stable(&b), a < 0.0);
    }

    #[test]
    fn stability_is_monotone_in_shift(b in sized_square(2, 4, 3.0), s in 0.0f64..3.0, t in 0.0f64..3.0) {
        let (lo, hi) = if s < t { (s, t) } else { (t, s) };
        let shift = |x: f64| &b - &Matrix::identity(b.rows()).scale(x);
        if is_stable(&shift(lo)) {
            prop_assert!(is_stable(&shift(hi)));
        }
    }

    #[test]
    fn certificate_has_small_residual(seed in any::<u64>(), p in 1usize..=5) {
        let b = stable_matrix(&mut rng(seed), p);
        let x = lyapunov_certificate(&b).unwrap();
        prop_assert!(ou_intervene::stability::certificate_residual(&b, &x) <= 1e-9 * x.max_abs().max(1.0));
    }

    #[test]
    fn found_diagonal_certificates_imply_stability(b in sized_square(2, 4, 2.0), seed in any::<u64>()) {
        let search = diagonal_lyapunov_certificate(&b, 300, seed);
        if let Some(d) = search.certificate {
            prop_assert!(verify_diagonal_certificate(&b, &d));
            prop_assert!(is_stable(&b));
        }
    }

    #[test]
    fn lyapunov_stationary_law_solves_equation(seed in any::<u64>(), p in 1usize..=5) {
        let mut r = rng(seed);
        let model = OuModel::new(
            vec![0.0; p],
            uniform_vec(&mut r, p, -2.0, 2.0),
            stable_matrix(&mut r, p),
            &uniform_matrix(&mut r, p, p, -0.5, 0.5) + &Matrix::identity(p),
        ).unwrap();
        let law = stationary_distribution(&model).unwrap();
        law.validate().unwrap();
        prop_assert_eq!(&law.mean[..], model.level());
        prop_assert!(lyapunov_residual(&model, &law.cov) <= 1e-9 * law.cov.norm_inf().max(1.0));
        prop_assert!(cholesky(&law.cov).is_ok());
    }

    #[test]
    fn intervened_mean_is_affine_in_c(seed in any::<u64>(), c0 in -5.0f64..5.0, c1 in -5.0f64..5.0) {
        let mut r = rng(seed);
        let model = triangular_model(upper_triangular(&mut r), uniform_vec(&mut r, 3, -3.0, 3.0));
        let mean = |c: f64| stationary_distribution(&intervene_ou(&model, Intervention::new(3, c)).unwrap().0).unwrap().mean;
        let (m0, m1, mid) = (mean(c0), mean(c1), mean(0.5 * (c0 + c1)));
        for i in 0..2 {
            prop_assert!((mid[i] - 0.5 * (m0[i] + m1[i])).abs() <= 1e-9 * (1.0 + m0[i].abs() + m1[i].abs()));
        }
    }

    #[test]
    fn pinning_x2_leaves_x3_mean(seed in any::<u64>(), c in -5.0f64..5.0) {
        let mut r = rng(seed);
        let a = uniform_vec(&mut r, 3, -3.0, 3.0);
        let model = triangular_model(upper_triangular(&mut r), a.clone());
        let (reduced, _) = intervene_ou(&model, Intervention::new(2, c)).unwrap();
        let law = stationary_distribution(&reduced).unwrap();
        prop_assert!((law.mean[1] - a[2]).abs() <= 1e-12 * a[2].abs().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn longer_quadrature_horizon_is_closer(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = stable_matrix(&mut r, 3);
        let model = OuModel::new(vec![0.0; 3], vec![0.0; 3], b.clone(), Matrix::identity(3)).unwrap();
        let gamma = stationary_distribution(&model).unwrap().cov;
        let h = default_horizon(&b);
        let gap = |t: f64| (&gamma - &gamma_by_quadrature(&model, t, 400).unwrap()).norm_inf();
        // Truncation dominates on short horizons.
        prop_assert!(gap(0.05 * h) > gap(0.1 * h));
        prop_assert!(gap(0.1 * h) > gap(0.2 * h));
    }

    #[test]
    fn transition_covariance_matches_simpson(seed in any::<u64>(), t in 0.1f64..2.0) {
        let mut r = rng(seed);
        let model = OuModel::new(
            vec![0.0; 3],
            vec![0.0; 3],
            uniform_matrix(&mut r, 3, 3, -1.0, 1.0),
            uniform_matrix(&mut r, 3, 2, -1.0, 1.0),
        ).unwrap();
        let q = exact_transition(&model, t).unwrap().q;
        let simpson = ou_intervene::stationary::simpson_covariance(model.speed(), &model.noise_covariance(), t, 400).unwrap();
        prop_assert!((&q - &simpson).max_abs() <= 1e-8 * q.max_abs().max(1.0));
    }

    #[test]
    fn transition_covariance_tends_to_stationary(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = stable_matrix(&mut r, 3);
        let model = OuModel::new(vec![0.0; 3], vec![1.0; 3], b.clone(), Matrix::identity(3)).unwrap();
        let gamma = stationary_distribution(&model).unwrap().cov;
        let tr = exact_transition(&model, default_horizon(&b)).unwrap();
        prop_assert!((&tr.q - &gamma).norm_inf() <= 1e-6 * gamma.norm_inf());
        prop_assert!(tr.f.max_abs() <= 1e-10);
    }

    #[test]
    fn symmetric_fast_path_matches_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = uniform_matrix(&mut r, 5, 5, -1.0, 1.0);
        let b = (&(&g * &g.transpose()) + &Matrix::identity(5).scale(0.1)).scale(-1.0);
        let fast = screen_principal_submatrices(&b, 4, 1e-9, DEFAULT_SUBSET_BUDGET).unwrap();
        // A tiny asymmetric perturbation disables the fast path.
        let mut rows = b.to_rows();
        rows[0][1] += 1e-9;
        let slow = screen_principal_submatrices(&Matrix::from_rows(&rows).unwrap(), 4, 1e-9, DEFAULT_SUBSET_BUDGET).unwrap();
        prop_assert_eq!(fast.entries.len(), slow.entries.len());
        prop_assert!(fast.entries.iter().skip(1).all(|e| e.basis == Basis::InclusionPrinciple));
        prop_assert!(slow.entries.iter().all(|e| e.basis == Basis::Computed));
        for (f, s) in fast.entries.iter().zip(&slow.entries) {
            prop_assert_eq!(&f.removed, &s.removed);
            prop_assert_eq!(f.report.classification, s.report.classification);
        }
        prop_assert!(fast.all_proper_principal_submatrices_stable);
    }
}
