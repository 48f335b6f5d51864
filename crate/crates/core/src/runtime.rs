//! Online controller (predictor, adaptive laws, control law) and the
//! closed-loop reference system used for analysis.

use std::sync::Arc;

use crate::design::{DesignArtifacts, Uncertainty};
use crate::error::{Error, Result};
use crate::lti::{rk4_step, StateSpace};
use crate::matlib::{dot, vec_norm_inf, Matrix};
use crate::scalar::{lit, to_f64, Real};

/// Smooth projection set: estimates confined to the ball of radius
/// `radius·√(1+eps)`; updates are untouched inside radius `radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBounds<T> {
    pub radius: T,
    pub eps: T,
}

impl<T: Real> ProjectionBounds<T> {
    pub fn new(radius: T, eps: T) -> Result<Self> {
        if !(radius > T::zero()) || !(eps > T::zero() && eps <= lit(0.2)) {
            return Err(Error::Config(format!(
                "projection needs radius > 0 and 0 < eps ≤ 0.2, got {radius}, {eps}"
            )));
        }
        Ok(Self { radius, eps })
    }

    /// Bounds whose outer boundary is exactly `outer`.
    pub fn with_outer(outer: T, eps: T) -> Result<Self> {
        Self::new(outer / (T::one() + eps).sqrt(), eps)
    }

    pub fn outer(&self) -> T {
        self.radius * (T::one() + self.eps).sqrt()
    }
}

/// `Proj(θ, y)` with `g(θ) = ((1+ε)θᵀθ − θ²_max)/(ε θ²_max)`, `θ_max` the
/// outer radius.
pub fn proj<T: Real>(theta: &[T], update: &[T], b: &ProjectionBounds<T>) -> Vec<T> {
    let tmax2 = b.outer() * b.outer();
    let one_eps = T::one() + b.eps;
    let g = (one_eps * dot(theta, theta) - tmax2) / (b.eps * tmax2);
    let grad: Vec<T> = theta.iter().map(|&t| lit::<T>(2.0) * one_eps * t / (b.eps * tmax2)).collect();
    let gy = dot(&grad, update);
    if g < T::zero() || gy <= T::zero() {
        return update.to_vec();
    }
    let gg = dot(&grad, &grad);
    update
        .iter()
        .zip(&grad)
        .map(|(&y, &d)| y - g * d * gy / gg)
        .collect()
}

/// Adaptation gains `(Γ_ω, Γ_θ, Γ_σ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptationGains<T> {
    pub omega: T,
    pub theta: T,
    pub sigma: T,
}

impl<T: Real> AdaptationGains<T> {
    pub fn uniform(g: T) -> Self {
        Self {
            omega: g,
            theta: g,
            sigma: g,
        }
    }

    /// `Γ = min(Γ_ω, Γ_θ, Γ_σ)`.
    pub fn min(&self) -> T {
        self.omega.min(self.theta).min(self.sigma)
    }
}

/// Controller state.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptiveState<T> {
    pub xu: Vec<T>,
    pub vhat: Vec<T>,
    pub yhat: Vec<T>,
    pub omega_hat: T,
    pub theta_hat: Vec<T>,
    pub sigma_hat: Vec<T>,
    pub ctrl_filter_state: Vec<T>,
    pub rz_filter_state: Vec<T>,
}

impl<T: Real> AdaptiveState<T> {
    fn pack(&self) -> Vec<T> {
        let mut v = Vec::new();
        v.extend_from_slice(&self.xu);
        v.extend_from_slice(&self.vhat);
        v.extend_from_slice(&self.yhat);
        v.push(self.omega_hat);
        v.extend_from_slice(&self.theta_hat);
        v.extend_from_slice(&self.sigma_hat);
        v.extend_from_slice(&self.ctrl_filter_state);
        v.extend_from_slice(&self.rz_filter_state);
        v
    }

    fn unpack(&mut self, v: &[T]) {
        let mut k = 0;
        let mut take = |dst: &mut Vec<T>| {
            let n = dst.len();
            dst.copy_from_slice(&v[k..k + n]);
            k += n;
        };
        take(&mut self.xu);
        take(&mut self.vhat);
        take(&mut self.yhat);
        let mut om = vec![self.omega_hat];
        take(&mut om);
        self.omega_hat = om[0];
        take(&mut self.theta_hat);
        take(&mut self.sigma_hat);
        take(&mut self.ctrl_filter_state);
        take(&mut self.rz_filter_state);
    }
}

/// Signals derived from the state and the current measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ControllerSignals<T> {
    pub xhat_v: Vec<T>,
    pub ytilde: Vec<T>,
    pub uz: Vec<T>,
    pub xg_norm: T,
    pub eta_hat: Vec<T>,
    pub e_y: Vec<T>,
    pub rz: Vec<T>,
}

/// The adaptive output-feedback controller.
#[derive(Debug, Clone)]
pub struct Controller<T> {
    design: Arc<DesignArtifacts<T>>,
    gains: AdaptationGains<T>,
    theta_bounds: ProjectionBounds<T>,
    sigma_bounds: ProjectionBounds<T>,
    omega_bounds: ProjectionBounds<T>,
    omega_center: T,
    state: AdaptiveState<T>,
}

impl<T: Real> Controller<T> {
    /// `ŷ(0) = y0` when the design assumes a measured initial output,
    /// zero otherwise. `ω̂(0) = 1`, clamped into `[ω_l, ω_u]`.
    pub fn new(design: Arc<DesignArtifacts<T>>, gains: AdaptationGains<T>, eps_proj: T, y0: &[T]) -> Result<Self> {
        if !(gains.min() > T::zero()) {
            return Err(Error::Config("adaptation gains must be positive".into()));
        }
        let d = &design;
        let (n, m, p) = (d.plant.n(), d.plant.m(), d.plant.p());
        if y0.len() != p {
            return Err(Error::Config(format!("y0 must have {p} entries")));
        }
        let (lo, hi) = d.omega_bounds;
        let omega_center = (lo + hi) / lit(2.0);
        // the interval itself is the outer boundary so ω̂ never leaves it
        let omega_bounds = ProjectionBounds::with_outer((hi - lo) / lit(2.0), eps_proj)?;
        let theta_bounds = ProjectionBounds::new(d.d_bar.max(T::epsilon()), eps_proj)?;
        let sigma_bounds = ProjectionBounds::new(d.b_bar.max(T::epsilon()), eps_proj)?;
        let state = AdaptiveState {
            xu: vec![T::zero(); d.interactor.nz()],
            vhat: vec![T::zero(); n],
            yhat: if d.y0_known { y0.to_vec() } else { vec![T::zero(); p] },
            omega_hat: T::one().max(lo).min(hi),
            theta_hat: vec![T::zero(); m],
            sigma_hat: vec![T::zero(); m],
            ctrl_filter_state: vec![T::zero(); d.ctrl_filter.order()],
            rz_filter_state: vec![T::zero(); d.rz_filter.order()],
        };
        Ok(Self {
            design,
            gains,
            theta_bounds,
            sigma_bounds,
            omega_bounds,
            omega_center,
            state,
        })
    }

    pub fn design(&self) -> &DesignArtifacts<T> {
        &self.design
    }

    pub fn state(&self) -> &AdaptiveState<T> {
        &self.state
    }

    pub fn gains(&self) -> AdaptationGains<T> {
        self.gains
    }

    pub fn theta_bounds(&self) -> ProjectionBounds<T> {
        self.theta_bounds
    }

    pub fn sigma_bounds(&self) -> ProjectionBounds<T> {
        self.sigma_bounds
    }

    /// `u = −C_c x_c`; the control filter is strictly proper.
    pub fn control(&self) -> Vec<T> {
        self.design
            .ctrl_filter
            .c
            .mul_vec(&self.state.ctrl_filter_state)
            .into_iter()
            .map(|v| -v)
            .collect()
    }

    pub fn signals(&self, y: &[T], r: &[T], u: &[T]) -> ControllerSignals<T> {
        signals(&self.design, &self.state, y, r, u)
    }

    /// Flat state length (for joint integration with a plant).
    pub fn state_len(&self) -> usize {
        self.state.pack().len()
    }

    pub fn packed_state(&self) -> Vec<T> {
        self.state.pack()
    }

    pub fn set_packed_state(&mut self, v: &[T]) {
        self.state.unpack(v);
    }

    /// Time derivative of the packed state for held `y`, `r` and `u`.
    pub fn derivative(&self, packed: &[T], y: &[T], r: &[T], u: &[T], out: &mut [T]) {
        let mut s = self.state.clone();
        s.unpack(packed);
        let d = &*self.design;
        let sig = signals(d, &s, y, r, u);
        let mut ds = s.clone();
        // x_u
        ds.xu = add(&d.interactor.az.mul_vec(&s.xu), &d.interactor.bz.mul_vec(u));
        // predictor
        ds.vhat = sub(
            &sub(&d.av.mul_vec(&sig.xhat_v), &d.kv.mul_vec(y)),
            &d.pred_correction.mul_vec(&sig.ytilde),
        );
        let cm_am_xv = d.cm_am.mul_vec(&sig.xhat_v);
        ds.yhat = add(
            &add(&sig.ytilde.iter().map(|&e| -d.alpha * e).collect::<Vec<_>>(), &cm_am_xv),
            &d.cmb.mul_vec(&sig.eta_hat),
        );
        // adaptive laws
        let w_upd = -dot(&sig.uz, &sig.e_y);
        let w = proj(&[s.omega_hat - self.omega_center], &[w_upd], &self.omega_bounds);
        ds.omega_hat = self.gains.omega * w[0];
        let th_upd: Vec<T> = sig.e_y.iter().map(|&e| -sig.xg_norm * e).collect();
        ds.theta_hat = scale(&proj(&s.theta_hat, &th_upd, &self.theta_bounds), self.gains.theta);
        let sg_upd: Vec<T> = sig.e_y.iter().map(|&e| -e).collect();
        ds.sigma_hat = scale(&proj(&s.sigma_hat, &sg_upd, &self.sigma_bounds), self.gains.sigma);
        // control-law filter driven by η̂ − r_z, and the r_z filter
        let drive = sub(&sig.eta_hat, &sig.rz);
        ds.ctrl_filter_state = add(
            &d.ctrl_filter.a.mul_vec(&s.ctrl_filter_state),
            &d.ctrl_filter.b.mul_vec(&drive),
        );
        ds.rz_filter_state = add(&d.rz_filter.a.mul_vec(&s.rz_filter_state), &d.rz_filter.b.mul_vec(r));
        out.copy_from_slice(&ds.pack());
    }

    /// One RK4 step of every controller state with `y`, `r`, `u` held.
    pub fn step(&mut self, t: T, y: &[T], r: &[T], u: &[T], h: T) -> Result<()> {
        let mut x = self.state.pack();
        let this = &*self;
        rk4_step(&mut |_t, s: &[T], ds: &mut [T]| this.derivative(s, y, r, u, ds), t, &mut x, h);
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteState { t: to_f64(t + h) });
        }
        self.state.unpack(&x);
        Ok(())
    }

    /// Predictor only (`v̂`, `ŷ`), estimates and filters frozen.
    pub fn predictor_step(&mut self, t: T, y: &[T], r: &[T], u: &[T], h: T) -> Result<()> {
        self.partial_step(t, y, r, u, h, Part::Predictor)
    }

    /// Adaptive laws only (`ω̂`, `θ̂`, `σ̂`).
    pub fn adapt_step(&mut self, t: T, y: &[T], r: &[T], u: &[T], h: T) -> Result<()> {
        self.partial_step(t, y, r, u, h, Part::Adapt)
    }

    /// Control-law, `r_z` and `x_u` filters only; returns the new `u`.
    pub fn control_step(&mut self, t: T, y: &[T], r: &[T], u: &[T], h: T) -> Result<Vec<T>> {
        self.partial_step(t, y, r, u, h, Part::Control)?;
        Ok(self.control())
    }

    fn partial_step(&mut self, t: T, y: &[T], r: &[T], u: &[T], h: T, part: Part) -> Result<()> {
        let before = self.state.clone();
        self.step(t, y, r, u, h)?;
        let after = std::mem::replace(&mut self.state, before);
        match part {
            Part::Predictor => {
                self.state.vhat = after.vhat;
                self.state.yhat = after.yhat;
            }
            Part::Adapt => {
                self.state.omega_hat = after.omega_hat;
                self.state.theta_hat = after.theta_hat;
                self.state.sigma_hat = after.sigma_hat;
            }
            Part::Control => {
                self.state.ctrl_filter_state = after.ctrl_filter_state;
                self.state.rz_filter_state = after.rz_filter_state;
                self.state.xu = after.xu;
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy)]
enum Part {
    Predictor,
    Adapt,
    Control,
}

fn signals<T: Real>(d: &DesignArtifacts<T>, s: &AdaptiveState<T>, y: &[T], r: &[T], u: &[T]) -> ControllerSignals<T> {
    let xhat_v = add(&s.vhat, &d.h.mul_vec(y));
    let ytilde = sub(&s.yhat, y);
    let uz = add(&d.interactor.cz.mul_vec(&s.xu), &d.interactor.dz.mul_vec(u));
    let xg_norm = vec_norm_inf(&xhat_v).max(vec_norm_inf(&s.xu));
    let eta_hat: Vec<T> = (0..uz.len())
        .map(|i| s.omega_hat * uz[i] + s.theta_hat[i] * xg_norm + s.sigma_hat[i])
        .collect();
    let e_y = d.ey_gain.mul_vec(&ytilde);
    let rz = add(&d.rz_filter.c.mul_vec(&s.rz_filter_state), &d.rz_filter.d.mul_vec(r));
    ControllerSignals {
        xhat_v,
        ytilde,
        uz,
        xg_norm,
        eta_hat,
        e_y,
        rz,
    }
}

/// Closed-loop reference system with the true `ω` and `f`:
/// `ẋ_ref = A_m x_ref + B_m(ω u_ref + f(x_ref, t))`,
/// `u_ref = C_0(s)(K_g r − f(x_ref, t))`.
#[derive(Clone)]
pub struct ReferenceSystem<T> {
    am: Matrix<T>,
    bm: Matrix<T>,
    kg: Matrix<T>,
    c0: StateSpace<T>,
    omega: T,
    f: Uncertainty<T>,
    pub x_ref: Vec<T>,
    pub filter_state: Vec<T>,
}

impl<T: Real> std::fmt::Debug for ReferenceSystem<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ReferenceSystem")
            .field("omega", &self.omega)
            .field("x_ref", &self.x_ref)
            .finish_non_exhaustive()
    }
}

impl<T: Real> ReferenceSystem<T> {
    pub fn new(design: &DesignArtifacts<T>, omega: T, f: Uncertainty<T>) -> Result<Self> {
        let c0 = design.c0_at(omega)?;
        if !c0.is_strictly_proper() {
            return Err(Error::ImproperRealization("C_0(s) must be strictly proper".into()));
        }
        Ok(Self {
            am: design.plant.am.clone(),
            bm: design.plant.bm.clone(),
            kg: design.kg.clone(),
            filter_state: vec![T::zero(); c0.order()],
            c0,
            omega,
            f,
            x_ref: vec![T::zero(); design.plant.n()],
        })
    }

    pub fn u_ref(&self) -> Vec<T> {
        self.c0.c.mul_vec(&self.filter_state)
    }

    pub fn state_len(&self) -> usize {
        self.x_ref.len() + self.filter_state.len()
    }

    pub fn packed_state(&self) -> Vec<T> {
        let mut v = self.x_ref.clone();
        v.extend_from_slice(&self.filter_state);
        v
    }

    pub fn set_packed_state(&mut self, v: &[T]) {
        let n = self.x_ref.len();
        self.x_ref.copy_from_slice(&v[..n]);
        self.filter_state.copy_from_slice(&v[n..]);
    }

    pub fn derivative(&self, t: T, packed: &[T], r: &[T], out: &mut [T]) {
        let n = self.x_ref.len();
        let (x, xc) = packed.split_at(n);
        let fx = (self.f)(x, t);
        let u = self.c0.c.mul_vec(xc);
        let drive: Vec<T> = self.kg.mul_vec(r).iter().zip(&fx).map(|(&a, &b)| a - b).collect();
        let inp: Vec<T> = u.iter().zip(&fx).map(|(&ui, &fi)| self.omega * ui + fi).collect();
        let dx = add(&self.am.mul_vec(x), &self.bm.mul_vec(&inp));
        let dxc = add(&self.c0.a.mul_vec(xc), &self.c0.b.mul_vec(&drive));
        out[..n].copy_from_slice(&dx);
        out[n..].copy_from_slice(&dxc);
    }

    /// One RK4 step with `r` held.
    pub fn step(&mut self, t: T, r: &[T], h: T) -> Result<()> {
        let mut v = self.packed_state();
        let this = &*self;
        rk4_step(&mut |tt, s: &[T], ds: &mut [T]| this.derivative(tt, s, r, ds), t, &mut v, h);
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFiniteState { t: to_f64(t + h) });
        }
        self.set_packed_state(&v);
        Ok(())
    }
}

fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x - y).collect()
}

fn scale<T: Real>(a: &[T], s: T) -> Vec<T> {
    a.iter().map(|&x| x * s).collect()
}
