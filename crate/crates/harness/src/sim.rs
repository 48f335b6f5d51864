//! Joint fixed-step co-simulation of plant, controller and reference system.

use std::collections::VecDeque;

use l1ofc::lti::rk4_step;
use l1ofc::matlib::vec_norm_inf;
use l1ofc::runtime::AdaptationGains;
use l1ofc::{Controller, ReferenceSystem};

use crate::error::{HarnessError, Result};
use crate::pendulum::{lqr_baseline_step, PendulumState};
use crate::scenario::{Scenario, SimPlant};

/// Output decimation interval.
pub const RECORD_EVERY_S: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Adaptive controller (on top of the inner gain for the pendulum).
    Adaptive,
    /// Static state feedback `u = −K x + K[0] r` from the scenario's baseline.
    Baseline,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    pub mode: Mode,
    pub gains: Option<AdaptationGains<f64>>,
    /// Input transport delay.
    pub delay_s: f64,
    /// Abort once `‖x‖∞` exceeds this; defaults to `10³·ρ_x`.
    pub divergence_limit: Option<f64>,
    /// Permit runs on a design that failed the filter condition.
    pub allow_infeasible: bool,
    pub horizon_s: Option<f64>,
    pub step_s: Option<f64>,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            mode: Mode::Adaptive,
            gains: None,
            delay_s: 0.0,
            divergence_limit: None,
            allow_infeasible: false,
            horizon_s: None,
            step_s: None,
        }
    }
}

/// One recorded sample.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Adaptive (or baseline) command.
    pub u: Vec<f64>,
    /// Total input entering the plant after the delay.
    pub u_plant: f64,
    pub r: f64,
    pub y_ref: Vec<f64>,
    pub x_ref: Vec<f64>,
    pub u_ref: Vec<f64>,
    pub ytilde_norm: f64,
    pub vhat: Vec<f64>,
    pub omega_hat: f64,
    pub theta_hat: Vec<f64>,
    pub sigma_hat: Vec<f64>,
    pub envelope: f64,
    /// Friction state (pendulum only).
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimTrace {
    pub mode: Mode,
    pub gains: AdaptationGains<f64>,
    pub delay_s: f64,
    pub step_s: f64,
    pub samples: Vec<Sample>,
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

impl SimTrace {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.t)
    }

    pub fn horizon(&self) -> f64 {
        self.samples.last().map_or(0.0, |s| s.t)
    }

    fn window(&self, from: f64) -> impl Iterator<Item = &Sample> {
        self.samples.iter().filter(move |s| s.t >= from)
    }

    /// `‖x_ref − x‖∞` per sample.
    pub fn tracking_error(&self) -> Vec<f64> {
        self.samples.iter().map(|s| dist(&s.x_ref, &s.x)).collect()
    }

    pub fn max_state_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(vec_norm_inf(&s.x)))
    }

    pub fn max_input_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(vec_norm_inf(&s.u)))
    }

    pub fn max_ref_state_norm(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, s| m.max(vec_norm_inf(&s.x_ref)))
    }

    /// Max of `‖x_ref − x‖∞` over samples with `t ≥ from`.
    pub fn max_tracking_after(&self, from: f64) -> f64 {
        self.window(from).fold(0.0, |m, s| m.max(dist(&s.x_ref, &s.x)))
    }

    pub fn max_ytilde_after(&self, from: f64) -> f64 {
        self.window(from).fold(0.0, |m, s| m.max(s.ytilde_norm))
    }

    /// Max of `‖y_ref − y‖∞` for `t ≥ from`.
    pub fn max_output_error_after(&self, from: f64) -> f64 {
        self.window(from).fold(0.0, |m, s| m.max(dist(&s.y_ref, &s.y)))
    }

    /// Peak-to-peak half amplitude plus mean magnitude of `y_ref` for `t ≥ from`.
    pub fn y_ref_amplitude_after(&self, from: f64) -> f64 {
        self.window(from).fold(0.0, |m, s| m.max(vec_norm_inf(&s.y_ref)))
    }

    /// Max of `|x_i − r|` for `t ≥ from`.
    pub fn max_position_error_after(&self, i: usize, from: f64) -> f64 {
        self.window(from).fold(0.0, |m, s| m.max((s.x[i] - s.r).abs()))
    }
}

/// Ring buffer realizing an input transport delay of `len` steps.
#[derive(Debug, Clone)]
struct DelayLine {
    buf: VecDeque<Vec<f64>>,
    len: usize,
}

impl DelayLine {
    fn new(len: usize, width: usize) -> Self {
        Self {
            buf: std::iter::repeat(vec![0.0; width]).take(len).collect(),
            len,
        }
    }

    fn push(&mut self, u: Vec<f64>) -> Vec<f64> {
        if self.len == 0 {
            return u;
        }
        self.buf.push_back(u);
        self.buf.pop_front().unwrap_or_default()
    }
}

/// Co-simulates the scenario's plant, the controller (or baseline) and the
/// reference system with one RK4 clock and zero-order-held inputs.
pub fn run_closed_loop(sc: &Scenario, opts: &RunOptions) -> Result<SimTrace> {
    let design = &sc.design;
    if opts.mode == Mode::Adaptive && !design.feasible() && !opts.allow_infeasible {
        return Err(HarnessError::DesignInfeasible(design.feasibility.diagnosis.clone()));
    }
    let baseline = match opts.mode {
        Mode::Baseline => Some(
            sc.file
                .baseline
                .clone()
                .ok_or_else(|| HarnessError::Config("scenario has no baseline gain".into()))?,
        ),
        Mode::Adaptive => None,
    };
    let h = opts.step_s.unwrap_or(sc.file.step_s);
    let horizon = opts.horizon_s.unwrap_or(sc.file.horizon_s);
    if !(h > 0.0 && horizon > h && opts.delay_s >= 0.0) {
        return Err(HarnessError::Config("need 0 < step < horizon and delay ≥ 0".into()));
    }
    let gains = opts.gains.unwrap_or(sc.gains);
    let model = &design.plant;
    let (n, m) = (model.n(), model.m());
    let x0 = &sc.file.x0;
    let y0 = model.cm.mul_vec(x0);

    let mut ctrl = Controller::new(design.clone(), gains, sc.eps_proj, &y0)?;
    let ref_omega = match &sc.sim_plant {
        SimPlant::Linear { omega, .. } => *omega,
        SimPlant::Pendulum { .. } => sc.file.plant.omega,
    };
    let mut refsys = ReferenceSystem::new(design, ref_omega, sc.plant.f.clone())?;

    let mut plant_state = x0.clone();
    if let SimPlant::Pendulum { .. } = sc.sim_plant {
        plant_state.push(0.0);
    }
    let (np, nc) = (plant_state.len(), ctrl.state_len());
    let mut w = plant_state;
    w.extend(ctrl.packed_state());
    w.extend(refsys.packed_state());

    let steps = (horizon / h).round() as usize;
    let every = ((RECORD_EVERY_S / h).round() as usize).max(1);
    let mut delay = DelayLine::new((opts.delay_s / h).round() as usize, m);
    let limit = opts.divergence_limit.unwrap_or(1e3 * design.rho_x);
    let x0_norm = sc.x0_norm();
    let gamma_min = gains.min();
    let reference = &sc.file.reference;
    let mut samples = Vec::with_capacity(steps / every + 1);

    for k in 0..=steps {
        let t = k as f64 * h;
        let r = reference.eval(t);
        ctrl.set_packed_state(&w[np..np + nc]);
        let x = &w[..n];
        let u_cmd = match &baseline {
            Some(gain) => vec![lqr_baseline_step(gain, x, r)],
            None => ctrl.control(),
        };
        let inner = match (&sc.sim_plant, opts.mode) {
            (SimPlant::Pendulum { inner_gain, .. }, Mode::Adaptive) => {
                -inner_gain.iter().zip(x).map(|(g, v)| g * v).sum::<f64>()
            }
            _ => 0.0,
        };
        let u_total: Vec<f64> = u_cmd.iter().map(|u| u + inner).collect();
        let u_applied = delay.push(u_total);

        if k % every == 0 {
            refsys.set_packed_state(&w[np + nc..]);
            let y = model.cm.mul_vec(x);
            let sig = ctrl.signals(&y, &[r], &u_cmd);
            let st = ctrl.state();
            samples.push(Sample {
                t,
                x: x.to_vec(),
                y,
                u: u_cmd.clone(),
                u_plant: u_applied[0],
                r,
                y_ref: model.cm.mul_vec(&refsys.x_ref),
                x_ref: refsys.x_ref.clone(),
                u_ref: refsys.u_ref(),
                ytilde_norm: vec_norm_inf(&sig.ytilde),
                vhat: st.vhat.clone(),
                omega_hat: st.omega_hat,
                theta_hat: st.theta_hat.clone(),
                sigma_hat: st.sigma_hat.clone(),
                envelope: design.envelope(t, x0_norm, gamma_min),
                z: if np > n { w[n] } else { 0.0 },
            });
        }
        if k == steps {
            break;
        }

        let mut fault: Option<HarnessError> = None;
        let adaptive = opts.mode == Mode::Adaptive;
        let mut deriv = |tt: f64, s: &[f64], ds: &mut [f64]| {
            let rr = [reference.eval(tt)];
            let (xs, rest) = s.split_at(np);
            let (cs, rs) = rest.split_at(nc);
            let (dx, drest) = ds.split_at_mut(np);
            let (dc, dr) = drest.split_at_mut(nc);
            match &sc.sim_plant {
                SimPlant::Linear { omega, .. } => {
                    let fx = (sc.plant.f)(xs, tt);
                    let inp: Vec<f64> = u_applied.iter().zip(&fx).map(|(u, fi)| omega * u + fi).collect();
                    let a = model.am.mul_vec(xs);
                    let b = model.bm.mul_vec(&inp);
                    for i in 0..n {
                        dx[i] = a[i] + b[i];
                    }
                }
                SimPlant::Pendulum { model: pend, .. } => {
                    if let Err(e) = pend.derivative(tt, xs, u_applied[0], dx) {
                        fault.get_or_insert(e);
                    }
                }
            }
            if adaptive {
                let y = model.cm.mul_vec(&xs[..n]);
                ctrl.derivative(cs, &y, &rr, &u_cmd, dc);
            } else {
                dc.iter_mut().for_each(|v| *v = 0.0);
            }
            refsys.derivative(tt, rs, &rr, dr);
        };
        rk4_step(&mut deriv, t, &mut w, h);
        if let Some(e) = fault {
            return Err(e);
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(HarnessError::NonFiniteState { t: t + h });
        }
        let norm = vec_norm_inf(&w[..n]);
        if norm > limit {
            return Err(HarnessError::Divergence { t: t + h, norm });
        }
    }
    Ok(SimTrace {
        mode: opts.mode,
        gains,
        delay_s: opts.delay_s,
        step_s: h,
        samples,
    })
}

/// Pendulum state of a sample, for traces from pendulum scenarios.
pub fn pendulum_state(s: &Sample) -> PendulumState {
    PendulumState {
        p: s.x[0],
        p_dot: s.x[1],
        theta: s.x[2],
        theta_dot: s.x[3],
        z: s.z,
    }
}
