use l1ofc::lti::{l1_norm, parallel, series, Poly, StateSpace, TransferFunction};
use l1ofc::matlib::{inverse, lyapunov_residual, solve_lyapunov, spectral_abscissa};
use l1ofc::Mat;
use proptest::prelude::*;

fn stable_system(n: usize, entries: &[f64], shift: f64) -> StateSpace<f64> {
    let take = |k: usize, r: usize, c: usize| Mat::from_fn(r, c, |i, j| entries[(k + i * c + j) % entries.len()]);
    let a0 = take(0, n, n);
    let s = spectral_abscissa(&a0).unwrap().max(0.0) + shift;
    StateSpace::new(a0.add_diag(-s), take(7, n, 1), take(3, 1, n), take(5, 1, 1).scale(0.5)).unwrap()
}

/// The engine truncates the impulse-response tail at `1e-6·max(1, ‖G‖)`.
fn tol(v: f64) -> f64 {
    2e-6 * v.max(1.0)
}

fn systems() -> impl Strategy<Value = StateSpace<f64>> {
    (1usize..=3, prop::collection::vec(-1.0f64..1.0, 9), 0.2f64..2.0).prop_map(|(n, e, s)| stable_system(n, &e, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn first_order_lag_norm(a in 0.2f64..10.0) {
        let g = TransferFunction::new(Poly::constant(1.0), Poly::linear(a)).unwrap().to_state_space().unwrap();
        let v = l1_norm(&g).unwrap();
        prop_assert!((v * a - 1.0).abs() < 1e-4);
    }

    #[test]
    fn norm_is_submultiplicative(g1 in systems(), g2 in systems()) {
        let (n1, n2) = (l1_norm(&g1).unwrap(), l1_norm(&g2).unwrap());
        let p = l1_norm(&series(&g2, &g1).unwrap()).unwrap();
        prop_assert!(p <= n1 * n2 + tol(n1 * n2));
    }

    #[test]
    fn norm_is_subadditive(g1 in systems(), g2 in systems()) {
        let (n1, n2) = (l1_norm(&g1).unwrap(), l1_norm(&g2).unwrap());
        let s = l1_norm(&parallel(&g1, &g2).unwrap()).unwrap();
        prop_assert!(s <= n1 + n2 + tol(n1 + n2));
    }

    #[test]
    fn norm_is_homogeneous(g in systems(), k in -5.0f64..5.0) {
        let n = l1_norm(&g).unwrap();
        let nk = l1_norm(&g.scale(k)).unwrap();
        prop_assert!((nk - k.abs() * n).abs() <= tol(nk.max(k.abs() * n)));
    }

    #[test]
    fn norm_bounds_dc_gain(g in systems()) {
        let dc = g.dc_gain().unwrap()[(0, 0)].abs();
        let n = l1_norm(&g).unwrap();
        prop_assert!(dc <= n + tol(n));
    }

    #[test]
    fn lyapunov_solution_is_accurate(g in systems()) {
        let q = Mat::identity(g.a.rows());
        let p = solve_lyapunov(&g.a, &q).unwrap();
        prop_assert!(lyapunov_residual(&g.a, &p, &q) < 1e-9);
    }

    #[test]
    fn inverse_recovers_identity(e in prop::collection::vec(-1.0f64..1.0, 16)) {
        let a = Mat::from_fn(4, 4, |i, j| e[4 * i + j]).add_diag(5.0);
        let prod = &a * &inverse(&a).unwrap();
        prop_assert!((&prod - &Mat::identity(4)).max_abs() < 1e-12);
    }
}
