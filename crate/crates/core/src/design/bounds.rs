//! Reference-system bounds, the γ constants and the adaptation-gain gate.

use super::filters::FilterNorms;
use super::DesignArtifacts;
use crate::error::{Error, Result};
use crate::scalar::{lit, to_f64, Real};

pub(super) struct BoundInputs<T> {
    pub m: usize,
    pub omega_u: T,
    pub rho0: T,
    pub b0: T,
    pub gamma_bar: T,
    pub r_bound: T,
    pub rho_r: T,
    pub l_rho_r: T,
    pub rho_int: T,
    pub kappa_m: T,
    pub kappa_x: T,
    pub kappa_y: T,
    pub kappa_v: T,
    pub norms: FilterNorms<T>,
    pub py_min: T,
    pub pv_min: T,
    pub pv_max: T,
    pub q_min: T,
    pub eps_q: T,
    pub alpha_y: T,
    pub d_bar: T,
    pub b_bar: T,
    pub l_theta: T,
    pub l_sigma: T,
}

/// Transient/steady-state constants. `certified` is false when the
/// small-gain denominator `1 − ‖G‖L` is not positive, in which case the
/// entries are evaluated literally but carry no guarantee.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<T> {
    pub one_minus_gl: T,
    pub rho_rx: T,
    pub rho_ru: T,
    pub gamma_x0: T,
    pub gamma_u0: T,
    pub gamma_x: T,
    pub gamma_u: T,
    pub eps_gamma: T,
    pub rho_u: T,
    pub rho_dx: T,
    pub rho_du: T,
    pub lambda1: T,
    pub theta0: T,
    pub theta1: T,
    pub gamma_min: T,
    pub py_min: T,
    pub pv_min: T,
    pub certified: bool,
}

impl<T: Real> BoundReport<T> {
    pub(super) fn compute(i: &BoundInputs<T>) -> Self {
        let nm = &i.norms;
        let one_minus_gl = T::one() - nm.g * i.l_rho_r;
        let rho_rx = i.rho_r - i.rho_int / one_minus_gl;
        let rho_ru = nm.c0 * (i.l_rho_r * rho_rx + i.b0) + nm.c0_kg * i.r_bound;
        let gamma_x0 = (i.kappa_x + i.kappa_m) / one_minus_gl;
        let gamma_u0 = nm.c0 * i.l_rho_r * gamma_x0 + nm.c1 * i.kappa_y + nm.c2 * i.kappa_v;
        let (sy, sv) = (i.py_min.sqrt(), i.pv_min.sqrt());
        let gamma_x = (nm.h1 / sy + nm.h2 / sv) / one_minus_gl;
        let gamma_u = nm.c0 * i.l_rho_r * gamma_x + nm.c1 / sy + nm.c2 / sv;
        let eps_gamma = lit::<T>(0.99) * i.gamma_bar / gamma_x.max(gamma_u);
        let rho_dx = gamma_x0 * i.rho0 + i.gamma_bar;
        let rho_du = gamma_u0 * i.rho0 + i.gamma_bar;
        let rho_u = rho_ru + rho_du;
        let lambda1 = ((i.q_min - i.eps_q) / i.pv_max).min(i.alpha_y);
        let m = lit::<T>(i.m as f64);
        let four = lit::<T>(4.0);
        let theta0 = four * (i.omega_u * i.omega_u + m * i.d_bar * i.d_bar + m * i.b_bar * i.b_bar);
        let theta1 = theta0 + four * m * (i.d_bar * i.l_theta + i.b_bar * i.l_sigma) / lambda1;
        let gamma_min = theta1 / (eps_gamma * eps_gamma);
        let certified = one_minus_gl > T::zero()
            && rho_rx > T::zero()
            && [rho_ru, gamma_x, gamma_u, eps_gamma, lambda1, gamma_min]
                .iter()
                .all(|v| v.is_finite() && *v > T::zero());
        Self {
            one_minus_gl,
            rho_rx,
            rho_ru,
            gamma_x0,
            gamma_u0,
            gamma_x,
            gamma_u,
            eps_gamma,
            rho_u,
            rho_dx,
            rho_du,
            lambda1,
            theta0,
            theta1,
            gamma_min,
            py_min: i.py_min,
            pv_min: i.pv_min,
            certified,
        }
    }
}

/// Returns the bound table if `Γ = min(Γ_ω, Γ_θ, Γ_σ)` clears `θ_1/ε_γ²`.
pub fn performance_bounds<T: Real>(d: &DesignArtifacts<T>, gamma: T) -> Result<BoundReport<T>> {
    let b = d.bounds;
    if !(gamma > b.gamma_min) {
        return Err(Error::GammaTooSmall {
            gamma: to_f64(gamma),
            gamma_min: to_f64(b.gamma_min),
        });
    }
    Ok(b)
}
