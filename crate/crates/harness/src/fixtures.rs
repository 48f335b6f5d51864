//! The two example plants and seeded random plants with `C_m B_m = 0`.

use l1ofc::design::{FilterSpec, PlantSpec};
use l1ofc::interactor::{build_scalar_interactor, InteractorSpec, PlantModel};
use l1ofc::lti::{is_controllable, is_observable, transmission_zeros};
use l1ofc::matlib::spectral_abscissa;
use l1ofc::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::pendulum::{Disturbance, FrictionForm, Pendulum, PendulumParams};
use crate::uncertainty::{DeclaredBounds, UncertaintyKind};

pub fn academic_model() -> PlantModel<f64> {
    PlantModel::new(
        Mat::from_rows(&[[-2.0, 0.0, 1.0], [1.0, -5.0, 2.0], [1.0, 0.0, -5.5]]),
        Mat::from_rows(&[[2.0], [2.5], [-3.0]]),
        Mat::from_rows(&[[-5.0, 10.0, 5.0], [1.25, -1.0, 0.0]]),
    )
    .expect("academic matrices are consistent")
}

/// `ω ∈ [0.7, 1.2]`, `‖x0‖ ≤ 0.9`, with `f1` or `f2` and their bounds.
pub fn academic_plant(kind: UncertaintyKind) -> PlantSpec<f64> {
    let b = kind.builtin_bounds().expect("f1, f2 and none have built-in bounds");
    PlantSpec {
        model: academic_model(),
        omega_bounds: (0.7, 1.2),
        f: kind.function(),
        b0: b.b0,
        d_of_delta: b.d_of_delta,
        b_of_delta: b.b_of_delta,
        rho0: 0.9,
        gamma_bar: 0.1,
    }
}

/// `Z(s) = 4/(s + 4)`.
pub fn academic_interactor() -> InteractorSpec<f64> {
    build_scalar_interactor(&[-4.0], 1.0, 1).expect("stable pole")
}

/// `D(s) = 5/(s(s/11 + 1))`.
pub fn academic_filter() -> FilterSpec<f64> {
    FilterSpec {
        gain: 5.0,
        poles: vec![-11.0],
        integrators: 1,
    }
}

/// LQR closed loop used as the desired model of the cart-pole.
pub fn pendulum_model() -> PlantModel<f64> {
    PlantModel::new(
        Mat::from_rows(&[
            [0.0, 1.0, 0.0, 0.0],
            [14.62, 20.64, 88.23, 15.87],
            [0.0, 0.0, 0.0, 1.0],
            [-44.26, -62.47, -237.34, -48.04],
        ]),
        Mat::from_rows(&[[0.0], [2.07], [0.0], [-6.26]]),
        Mat::from_rows(&[[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]]),
    )
    .expect("pendulum matrices are consistent")
}

/// `Z(s) = 0.47/(s + 30)`.
pub fn pendulum_interactor() -> InteractorSpec<f64> {
    build_scalar_interactor(&[-30.0], 0.47 / 30.0, 1).expect("stable pole")
}

/// `D(s) = 30/(s(s/70 + 1)(s/100 + 1))`.
pub fn pendulum_filter() -> FilterSpec<f64> {
    FilterSpec {
        gain: 30.0,
        poles: vec![-70.0, -100.0],
        integrators: 1,
    }
}

/// Predictor gain used by the cart-pole scenarios.
pub fn pendulum_kv() -> Mat {
    Mat::from_rows(&[[-4.51, -1.56], [-22.087, -22.91], [-1.56, -2.87], [36.98, 40.55]])
}

/// Nonlinear cart-pole plus the controller-side plant description.
pub fn pendulum_plant(perturbed: bool, friction: Option<FrictionForm>, disturbance: Disturbance) -> (Pendulum, PlantSpec<f64>) {
    let model = pendulum_model();
    let mut params = PendulumParams::nominal();
    params.inertia = params.inertia_from_input_ratio(model.bm[(1, 0)], model.bm[(3, 0)]);
    if perturbed {
        params = params.perturbed();
    }
    let bounds = DeclaredBounds {
        b0: 2.0,
        d_coeffs: vec![20.0],
        b_coeffs: vec![2.0],
    }
    .to_bounds();
    let spec = PlantSpec {
        model,
        omega_bounds: (0.7, 1.3),
        f: UncertaintyKind::Pendulum.function(),
        b0: bounds.b0,
        d_of_delta: bounds.d_of_delta,
        b_of_delta: bounds.b_of_delta,
        rho0: 1.0,
        gamma_bar: 0.1,
    };
    (Pendulum::new(params, friction, disturbance), spec)
}

/// Random `(A, B, C)` with `CB = 0`: `C` is projected off `range(B)`.
/// Returns `None` unless the draw is minimal and minimum phase with a
/// full-column-rank `C A B`.
pub fn random_cancelled_plant(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize) -> Option<PlantModel<f64>> {
    assert!(m <= p && p + m <= n);
    let mut draw = |r: usize, c: usize| Mat::from_fn(r, c, |_, _| rng.gen_range(-1.0..1.0));
    let a0 = draw(n, n);
    let shift = spectral_abscissa(&a0).ok()? + 0.5;
    let a = a0.add_diag(-shift.max(0.0) - 0.5);
    let b = draw(n, m);
    let c0 = draw(p, n);
    let btb = &b.transpose() * &b;
    let proj = &Mat::identity(n) - &(&(&b * &l1ofc::matlib::inverse(&btb).ok()?) * &b.transpose());
    let c = &c0 * &proj;
    let model = PlantModel::new(a, b, c).ok()?;
    let cab = &(&model.cm * &model.am) * &model.bm;
    let minimal = is_controllable(&model.am, &model.bm).ok()? && is_observable(&model.am, &model.cm).ok()?;
    let min_phase = transmission_zeros(&model.transfer()).ok()?.iter().all(|z| z.re < -1e-3);
    let rank_ok = l1ofc::matlib::pinv_left(&cab).is_ok();
    (minimal && min_phase && rank_ok).then_some(model)
}

/// `count` accepted draws from a fixed seed, with `n ∈ 3..=5`, `m ∈ 1..=2`.
pub fn random_cancelled_plants(seed: u64, count: usize) -> Vec<PlantModel<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut tries = 0;
    while out.len() < count {
        tries += 1;
        assert!(tries < 100 * count, "random plant generator keeps rejecting draws");
        let n = rng.gen_range(3..=5);
        let m = rng.gen_range(1..=2usize).min(n / 2);
        let p = rng.gen_range(m..=n - m);
        if let Some(model) = random_cancelled_plant(&mut rng, n, m, p) {
            out.push(model);
        }
    }
    out
}
