//! Built-in matched uncertainties of the academic plant and their growth
//! bounds in the ∞-norm.

use std::sync::Arc;

use l1ofc::design::{Growth, Uncertainty};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UncertaintyKind {
    F1,
    F2,
    None,
    /// Lumped effect of the nonlinear pendulum; only the declared bounds exist.
    Pendulum,
}

/// `(b0, d_δ, b_δ)` for a plant description.
#[derive(Clone)]
pub struct UncertaintyBounds {
    pub b0: f64,
    pub d_of_delta: Growth<f64>,
    pub b_of_delta: Growth<f64>,
}

impl std::fmt::Debug for UncertaintyBounds {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("UncertaintyBounds").field("b0", &self.b0).finish_non_exhaustive()
    }
}

/// `Σ cᵢ δⁱ`, used for bounds declared in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeclaredBounds {
    pub b0: f64,
    pub d_coeffs: Vec<f64>,
    pub b_coeffs: Vec<f64>,
}

impl DeclaredBounds {
    pub fn to_bounds(&self) -> UncertaintyBounds {
        let poly = |c: Vec<f64>| -> Growth<f64> {
            Arc::new(move |d: f64| c.iter().rev().fold(0.0, |acc, &k| acc * d + k))
        };
        UncertaintyBounds {
            b0: self.b0,
            d_of_delta: poly(self.d_coeffs.clone()),
            b_of_delta: poly(self.b_coeffs.clone()),
        }
    }
}

fn norm2_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn f1(x: &[f64], t: f64) -> f64 {
    0.11 * norm2_sq(x) + 0.23 * x[0] * (0.5 * x[0]).tanh() * x[0] + 1.24 * x[1] * x[2] + 0.8 * (1.0 - (-0.7 * t).exp()) + 2.0
}

pub fn f2(x: &[f64], t: f64) -> f64 {
    0.15 * norm2_sq(x) + 0.22 * x[0] * (0.2 * x[0]).tanh() * x[0] + 1.34 * x[1] * x[2] + 0.5 * (1.0 - (-1.1 * t).exp()) + 1.8
}

/// `max_{0≤s≤δ} s² sech²(k s)`.
fn peak_s2_sech2(delta: f64, k: f64) -> f64 {
    // stationary point solves s·tanh(k s) = 1/k
    let (mut lo, mut hi) = (0.0, 10.0 / k);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if mid * (k * mid).tanh() < 1.0 / k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = delta.min(lo);
    let c = (k * s).cosh();
    s * s / (c * c)
}

/// `d_δ` for `a‖x‖₂² + c·x₁² tanh(k x₁) + e·x₂x₃` over `‖x‖∞ ≤ δ`: the
/// largest gradient 1-norm.
fn quadratic_growth(a: f64, c: f64, k: f64, e: f64) -> Growth<f64> {
    Arc::new(move |d: f64| {
        let d = d.max(0.0);
        2.0 * a * d + 2.0 * c * d * (k * d).tanh() + c * k * peak_s2_sech2(d, k) + 2.0 * (2.0 * a + e) * d
    })
}

impl UncertaintyKind {
    /// The function used by the simulated plant and the reference system.
    pub fn function(self) -> Uncertainty<f64> {
        match self {
            Self::F1 => Arc::new(|x: &[f64], t: f64| vec![f1(x, t)]),
            Self::F2 => Arc::new(|x: &[f64], t: f64| vec![f2(x, t)]),
            Self::None | Self::Pendulum => Arc::new(|_x: &[f64], _t: f64| vec![0.0]),
        }
    }

    /// Analytic bounds for the built-in functions; `None` for the pendulum.
    pub fn builtin_bounds(self) -> Option<UncertaintyBounds> {
        match self {
            Self::F1 => Some(UncertaintyBounds {
                b0: 2.8,
                d_of_delta: quadratic_growth(0.11, 0.23, 0.5, 1.24),
                b_of_delta: Arc::new(|_| 0.8 * 0.7),
            }),
            Self::F2 => Some(UncertaintyBounds {
                b0: 2.3,
                d_of_delta: quadratic_growth(0.15, 0.22, 0.2, 1.34),
                b_of_delta: Arc::new(|_| 0.5 * 1.1),
            }),
            Self::None => Some(UncertaintyBounds {
                b0: 0.0,
                d_of_delta: Arc::new(|_| 0.0),
                b_of_delta: Arc::new(|_| 0.0),
            }),
            Self::Pendulum => None,
        }
    }
}
