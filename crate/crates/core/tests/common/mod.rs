#![allow(dead_code)]

use std::sync::Arc;

use l1ofc::design::{synthesize, DesignConfig, FilterSpec, PlantSpec};
use l1ofc::interactor::{build_scalar_interactor, PlantModel};
use l1ofc::{Design, Mat};

pub fn academic_model() -> PlantModel<f64> {
    PlantModel::new(
        Mat::from_rows(&[[-2.0, 0.0, 1.0], [1.0, -5.0, 2.0], [1.0, 0.0, -5.5]]),
        Mat::from_rows(&[[2.0], [2.5], [-3.0]]),
        Mat::from_rows(&[[-5.0, 10.0, 5.0], [1.25, -1.0, 0.0]]),
    )
    .unwrap()
}

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
    .unwrap()
}

pub fn pendulum_kv() -> Mat {
    Mat::from_rows(&[[-4.51, -1.56], [-22.087, -22.91], [-1.56, -2.87], [36.98, 40.55]])
}

/// Plant spec with a linear growth bound `d_δ = slope`, `f ≡ 0`.
pub fn spec(model: PlantModel<f64>, omega: (f64, f64), b0: f64, slope: f64) -> PlantSpec<f64> {
    let m = model.m();
    PlantSpec {
        model,
        omega_bounds: omega,
        f: Arc::new(move |_x: &[f64], _t: f64| vec![0.0; m]),
        b0,
        d_of_delta: Arc::new(move |_| slope),
        b_of_delta: Arc::new(|_| 0.5),
        rho0: 0.9,
        gamma_bar: 0.1,
    }
}

pub fn academic_config() -> DesignConfig<f64> {
    let model = academic_model();
    let z = build_scalar_interactor(&[-4.0], 1.0, 1).unwrap();
    let filter = FilterSpec {
        gain: 5.0,
        poles: vec![-11.0],
        integrators: 1,
    };
    let mut cfg = DesignConfig::new(&model, z, filter, Mat::from_rows(&[[1.0]]), 4.0);
    cfg.q = Mat::identity(3).scale(100.0);
    cfg.rho_r_points = 40;
    cfg
}

pub fn academic_design() -> Design {
    synthesize(&spec(academic_model(), (0.7, 1.2), 2.8, 1.0), &academic_config()).unwrap()
}

pub fn pendulum_config() -> DesignConfig<f64> {
    let model = pendulum_model();
    let z = build_scalar_interactor(&[-30.0], 0.47 / 30.0, 1).unwrap();
    let filter = FilterSpec {
        gain: 30.0,
        poles: vec![-70.0, -100.0],
        integrators: 1,
    };
    let mut cfg = DesignConfig::new(&model, z, filter, Mat::from_rows(&[[-7.07]]), 0.5);
    cfg.q = Mat::identity(4).scale(10.0);
    cfg.alpha = Some(25.0);
    cfg.eps_q = Some(3.0);
    cfg.kv = Some(pendulum_kv());
    cfg.rho_r_points = 40;
    cfg
}

pub fn pendulum_design() -> Design {
    synthesize(&spec(pendulum_model(), (0.7, 1.3), 2.0, 20.0), &pendulum_config()).unwrap()
}
