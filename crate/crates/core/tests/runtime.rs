mod common;

use std::sync::Arc;

use common::*;
use l1ofc::design::h0_system;
use l1ofc::matlib::{dot, vec_norm2};
use l1ofc::runtime::{proj, AdaptationGains, Controller, ProjectionBounds, ReferenceSystem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn projection_leaves_interior_updates_alone() {
    let b = ProjectionBounds::new(2.0, 0.1).unwrap();
    let y = [3.0, -1.0];
    assert_eq!(proj(&[0.5, 0.5], &y, &b), y.to_vec());
}

#[test]
fn projection_never_points_outward_on_boundary() {
    let b = ProjectionBounds::new(1.0, 0.2).unwrap();
    let r = b.outer();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..500 {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let theta = [r * a.cos(), r * a.sin()];
        let y = [rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0)];
        assert!(dot(&theta, &proj(&theta, &y, &b)) <= 1e-12);
    }
}

#[test]
fn projection_is_nonexpansive_toward_admissible_points() {
    // (θ − θ*)ᵀ(Proj(θ, y) − y) ≤ 0 for ‖θ*‖ ≤ radius
    let b = ProjectionBounds::new(1.5, 0.1).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut draw = |s: f64| [rng.gen_range(-s..s), rng.gen_range(-s..s), rng.gen_range(-s..s)];
    let mut checked = 0;
    while checked < 1000 {
        let (theta, star, y) = (draw(1.6), draw(0.9), draw(10.0));
        if vec_norm2(&theta) > b.outer() || vec_norm2(&star) > b.radius {
            continue;
        }
        let p = proj(&theta, &y, &b);
        let lhs: f64 = (0..3).map(|i| (theta[i] - star[i]) * (p[i] - y[i])).sum();
        assert!(lhs <= 1e-10);
        checked += 1;
    }
}

#[test]
fn projection_rejects_bad_parameters() {
    assert!(ProjectionBounds::new(1.0_f64, 0.3).is_err());
    assert!(ProjectionBounds::new(-1.0_f64, 0.1).is_err());
    let b = ProjectionBounds::with_outer(2.0_f64, 0.1).unwrap();
    assert!((b.outer() - 2.0).abs() < 1e-15);
}

#[test]
fn estimates_stay_in_bounds_under_persistent_mismatch() {
    let design = Arc::new(academic_design());
    let mut ctrl = Controller::new(design.clone(), AdaptationGains::uniform(1e4), 0.1, &[0.0, 0.0]).unwrap();
    let (lo, hi) = design.omega_bounds;
    let (tb, sb) = (ctrl.theta_bounds().outer(), ctrl.sigma_bounds().outer());
    let h = 1e-4;
    for k in 0..20_000 {
        let t = k as f64 * h;
        let y = [5.0 * (3.0 * t).sin(), -3.0];
        let u = ctrl.control();
        ctrl.step(t, &y, &[1.0], &u, h).unwrap();
        let s = ctrl.state();
        assert!(s.omega_hat >= lo - 1e-9 && s.omega_hat <= hi + 1e-9, "omega_hat {}", s.omega_hat);
        assert!(vec_norm2(&s.theta_hat) <= tb * (1.0 + 1e-6));
        assert!(vec_norm2(&s.sigma_hat) <= sb * (1.0 + 1e-6));
    }
}

#[test]
fn controller_at_rest_stays_at_rest() {
    let design = Arc::new(academic_design());
    let mut ctrl = Controller::new(design, AdaptationGains::uniform(500.0), 0.1, &[0.0, 0.0]).unwrap();
    let start = ctrl.packed_state();
    for k in 0..1000 {
        ctrl.step(k as f64 * 1e-3, &[0.0, 0.0], &[0.0], &[0.0], 1e-3).unwrap();
    }
    assert_eq!(ctrl.packed_state(), start);
    assert_eq!(ctrl.control(), vec![0.0]);
}

#[test]
fn reference_system_settles_at_dc_gain() {
    // C(0) = I, so ω u_ref → K_g r and x_ref → H_0(0) K_g r
    let d = academic_design();
    let mut rs = ReferenceSystem::new(&d, 0.9, Arc::new(|_x: &[f64], _t: f64| vec![0.0])).unwrap();
    let h = 1e-3;
    for k in 0..20_000 {
        rs.step(k as f64 * h, &[2.0], h).unwrap();
    }
    let expect = h0_system(&d.plant).dc_gain().unwrap().scale(2.0);
    for (i, x) in rs.x_ref.iter().enumerate() {
        assert!((x - expect[(i, 0)]).abs() < 1e-6, "x_ref[{i}] = {x}");
    }
    assert!((0.9 * rs.u_ref()[0] - 2.0).abs() < 1e-6);
}

#[test]
fn controller_checks_inputs() {
    let design = Arc::new(academic_design());
    assert!(Controller::new(design.clone(), AdaptationGains::uniform(0.0), 0.1, &[0.0, 0.0]).is_err());
    assert!(Controller::new(design, AdaptationGains::uniform(1.0), 0.1, &[0.0]).is_err());
}
