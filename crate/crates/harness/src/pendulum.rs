//! Cart-pole with motor input, viscous and dynamic friction and an input
//! disturbance. State order is `[p, ṗ, θ, θ̇, z]`.

use l1ofc::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const GRAVITY: f64 = 9.81;

/// `K_lqr` for the nominal linearization.
pub const LQR_GAIN: [f64; 4] = [-7.0711, -14.4505, -43.7667, -7.6739];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    /// Cart mass `M`.
    pub cart_mass: f64,
    /// Pole mass `m`.
    pub pole_mass: f64,
    /// Pivot to centre of mass `l`.
    pub length: f64,
    /// Pole inertia `I` about its centre of mass.
    pub inertia: f64,
    /// Motor gain `ω`.
    pub omega: f64,
    /// Motor damping `ν`.
    pub nu: f64,
}

impl PendulumParams {
    /// Nominal hardware constants with `I = m·l²/3`.
    pub fn nominal() -> Self {
        let (m, l) = (0.210, 0.305);
        Self {
            cart_mass: 0.815,
            pole_mass: m,
            length: l,
            inertia: m * l * l / 3.0,
            omega: 1.719,
            nu: 7.682,
        }
    }

    /// Inertia for which the nominal input matrix has the ratio `b_p / b_θ`.
    pub fn inertia_from_input_ratio(&self, b_p: f64, b_theta: f64) -> f64 {
        let ml = self.pole_mass * self.length;
        -ml * b_p / b_theta - ml * self.length
    }

    /// Scaled variation: `M·1.2, m·0.8, l·1.2, ω·1.2, ν·1.5`; `I` kept.
    pub fn perturbed(&self) -> Self {
        Self {
            cart_mass: 1.2 * self.cart_mass,
            pole_mass: 0.8 * self.pole_mass,
            length: 1.2 * self.length,
            omega: 1.2 * self.omega,
            nu: 1.5 * self.nu,
            ..*self
        }
    }

    fn ml(&self) -> f64 {
        self.pole_mass * self.length
    }

    fn total_mass(&self) -> f64 {
        self.cart_mass + self.pole_mass
    }

    fn pole_inertia(&self) -> f64 {
        self.inertia + self.ml() * self.length
    }

    /// Linearization about the upright rest point with `cos θ ≈ 1`.
    pub fn linearize(&self) -> (Mat, Mat) {
        let (mt, ml, j) = (self.total_mass(), self.ml(), self.pole_inertia());
        let det = mt * j - ml * ml;
        let a = Mat::from_rows(&[
            [0.0, 1.0, 0.0, 0.0],
            [0.0, -self.nu * j / det, -ml * ml * GRAVITY / det, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [0.0, self.nu * ml / det, mt * ml * GRAVITY / det, 0.0],
        ]);
        let b = Mat::from_rows(&[[0.0], [self.omega * j / det], [0.0], [-self.omega * ml / det]]);
        (a, b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PendulumState {
    pub p: f64,
    pub p_dot: f64,
    pub theta: f64,
    pub theta_dot: f64,
    pub z: f64,
}

impl PendulumState {
    pub fn from_slice(v: &[f64]) -> Self {
        Self {
            p: v[0],
            p_dot: v[1],
            theta: v[2],
            theta_dot: v[3],
            z: v[4],
        }
    }

    pub fn to_vec(self) -> Vec<f64> {
        vec![self.p, self.p_dot, self.theta, self.theta_dot, self.z]
    }
}

/// `d(t) = amp·sin(freq·t)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Disturbance {
    pub amp: f64,
    pub freq: f64,
}

/// Sign convention of the friction denominator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrictionForm {
    /// Negative `h(ṗ)` used directly: the bristle state is anti-damped and grows
    /// exponentially while the cart moves.
    #[default]
    Literal,
    /// `|h(ṗ)|`, the usual dissipative dynamic-friction form.
    Dissipative,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pendulum {
    pub params: PendulumParams,
    /// `None` disables friction.
    pub friction: Option<FrictionForm>,
    pub disturbance: Disturbance,
}

impl Pendulum {
    pub fn new(params: PendulumParams, friction: Option<FrictionForm>, disturbance: Disturbance) -> Self {
        if friction.is_some() {
            // h is negative for every velocity, so the 1/h terms never blow up
            assert!(friction_h(&params, 0.0) < 0.0 && friction_h(&params, 1e3) < 0.0);
        }
        Self {
            params,
            friction,
            disturbance,
        }
    }

    /// `(F_fric, ż)` for cart velocity `ṗ` and internal state `z`.
    pub fn friction(&self, p_dot: f64, z: f64) -> (f64, f64) {
        let Some(form) = self.friction else {
            return (0.0, 0.0);
        };
        let h = friction_h(&self.params, p_dot);
        // guard against h → 0, unreachable for the shipped constants
        let h = if h.abs() < 1e-9 { -1e-9 } else { h };
        let h = match form {
            FrictionForm::Literal => h,
            FrictionForm::Dissipative => -h,
        };
        let ratio = p_dot.abs() / h;
        let force = -73.0 * p_dot - 121.0 * z * (1.0 - 70.0 * ratio);
        let z_dot = p_dot - 121.0 * ratio * z;
        (force, z_dot)
    }

    pub fn disturbance_at(&self, t: f64) -> f64 {
        self.disturbance.amp * (self.disturbance.freq * t).sin()
    }

    /// `(p̈, θ̈)` from the 2×2 mass-matrix solve.
    pub fn accelerations(&self, t: f64, s: &PendulumState, u: f64) -> Result<(f64, f64)> {
        let pr = &self.params;
        let (mt, ml, j) = (pr.total_mass(), pr.ml(), pr.pole_inertia());
        let (sin, cos) = s.theta.sin_cos();
        let (force, _) = self.friction(s.p_dot, s.z);
        let rhs1 = pr.omega * u - pr.nu * s.p_dot + force + self.disturbance_at(t) + ml * sin * s.theta_dot * s.theta_dot;
        let rhs2 = ml * GRAVITY * sin;
        let det = mt * j - ml * ml * cos * cos;
        if !(det.abs() > 1e-12 * mt * j) {
            return Err(HarnessError::MassMatrixSingular { det });
        }
        let p_dd = (j * rhs1 - ml * cos * rhs2) / det;
        let th_dd = (mt * rhs2 - ml * cos * rhs1) / det;
        Ok((p_dd, th_dd))
    }

    pub fn derivative(&self, t: f64, x: &[f64], u: f64, out: &mut [f64]) -> Result<()> {
        let s = PendulumState::from_slice(x);
        let (p_dd, th_dd) = self.accelerations(t, &s, u)?;
        out[0] = s.p_dot;
        out[1] = p_dd;
        out[2] = s.theta_dot;
        out[3] = th_dd;
        out[4] = self.friction(s.p_dot, s.z).1;
        Ok(())
    }

    /// Kinetic plus potential energy of the undamped cart-pole.
    pub fn energy(&self, s: &PendulumState) -> f64 {
        let pr = &self.params;
        let (mt, ml, j) = (pr.total_mass(), pr.ml(), pr.pole_inertia());
        0.5 * mt * s.p_dot * s.p_dot
            + ml * s.theta.cos() * s.p_dot * s.theta_dot
            + 0.5 * j * s.theta_dot * s.theta_dot
            + ml * GRAVITY * s.theta.cos()
    }
}

/// `h(ṗ)` of the friction model.
pub fn friction_h(params: &PendulumParams, p_dot: f64) -> f64 {
    let v = p_dot / 0.105;
    -(0.04287 + 0.0432 * (-v * v).exp()) * params.total_mass() * GRAVITY
}

/// `u = −K x + K[0]·r`: state feedback on the position error.
pub fn lqr_baseline_step(gain: &[f64], x: &[f64], r: f64) -> f64 {
    -gain.iter().zip(x).map(|(k, v)| k * v).sum::<f64>() + gain[0] * r
}
