//! Offline synthesis: predictor gain, filters, every scalar design constant,
//! the L1 feasibility search and the performance-bound table.

mod bounds;
pub mod filters;

use std::fmt;
use std::sync::Arc;

pub use bounds::{performance_bounds, BoundReport};
pub use filters::{c0_system, control_filter, h0_system, omega_filters, FilterNorms, FilterSpec, OmegaFilters};

use crate::error::{Error, Result};
use crate::interactor::{solve_coupling, InteractorRealization, InteractorSpec, PlantModel};
use crate::lti::{is_controllable, is_observable, l1_norm, transmission_zeros, StateSpace};
use crate::matlib::{
    cholesky_upper, eigenvalues, expm, inverse, lyapunov_residual, norm2,
    pinv_left, place_output_injection, require_detectable, require_hurwitz, solve_lyapunov, spectral_abscissa,
    symmetric_extremes, Matrix,
};
use crate::scalar::{lit, to_f64, Real};

/// `f(x, t)`, returning an `m`-vector.
pub type Uncertainty<T> = Arc<dyn Fn(&[T], T) -> Vec<T> + Send + Sync>;
/// Monotone map `δ ↦ d_δ` or `δ ↦ b_δ`.
pub type Growth<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Plant with its uncertainty description.
#[derive(Clone)]
pub struct PlantSpec<T> {
    pub model: PlantModel<T>,
    pub omega_bounds: (T, T),
    pub f: Uncertainty<T>,
    /// `‖f(0, t)‖ < b0`
    pub b0: T,
    pub d_of_delta: Growth<T>,
    pub b_of_delta: Growth<T>,
    /// `‖x0‖ ≤ rho0`
    pub rho0: T,
    pub gamma_bar: T,
}

impl<T: Real> fmt::Debug for PlantSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PlantSpec")
            .field("model", &self.model)
            .field("omega_bounds", &self.omega_bounds)
            .field("b0", &self.b0)
            .field("rho0", &self.rho0)
            .field("gamma_bar", &self.gamma_bar)
            .finish_non_exhaustive()
    }
}

impl<T: Real> PlantSpec<T> {
    /// Checks Hurwitz/minimality, minimum phase and the ω interval.
    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.omega_bounds;
        if !(lo > T::zero() && lo < hi) {
            return Err(Error::Config(format!(
                "omega bounds must satisfy 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        if !(self.gamma_bar > T::zero()) || self.rho0 < T::zero() || self.b0 < T::zero() {
            return Err(Error::Config("gamma_bar > 0, rho0 ≥ 0 and b0 ≥ 0 required".into()));
        }
        let m = &self.model;
        require_hurwitz(&m.am)?;
        let controllable = is_controllable(&m.am, &m.bm)?;
        let observable = is_observable(&m.am, &m.cm)?;
        if !(controllable && observable) {
            return Err(Error::NotMinimal {
                controllable,
                observable,
            });
        }
        for z in transmission_zeros(&m.transfer())? {
            if z.re >= T::zero() {
                return Err(Error::NonMinimumPhase {
                    re: to_f64(z.re),
                    im: to_f64(z.im),
                });
            }
        }
        Ok(())
    }

    fn omega_probes(&self) -> [T; 3] {
        let (lo, hi) = self.omega_bounds;
        [lo, (lo + hi) / lit(2.0), hi]
    }

    /// `L_δ = (δ̄/δ)·d_δ̄` with `δ̄ = δ + γ̄`.
    pub fn lipschitz(&self, delta: T) -> T {
        let dbar = delta + self.gamma_bar;
        dbar / delta * (self.d_of_delta)(dbar)
    }
}

/// Tunable design inputs.
#[derive(Debug, Clone)]
pub struct DesignConfig<T> {
    pub interactor: InteractorSpec<T>,
    pub filter: FilterSpec<T>,
    /// Feed-forward gain, `m × m_r`.
    pub kg: Matrix<T>,
    /// Declared `‖r‖_{L∞}`.
    pub r_bound: T,
    pub q: Matrix<T>,
    pub p_y: Matrix<T>,
    /// Defaults to `0.1·λ_min(Q)`.
    pub eps_q: Option<T>,
    /// Defaults to `max(α_φ, 1)`, which gives `α_y = α` when `α_φ ≥ 1`.
    pub alpha: Option<T>,
    /// Predictor gain override; otherwise placed with `kv_rate`.
    pub kv: Option<Matrix<T>>,
    pub kv_rate: T,
    pub l_theta: Option<T>,
    pub l_sigma: Option<T>,
    /// `false` selects `ŷ(0) = 0` and `P̄_v → P_v` in the κ constants.
    pub y0_known: bool,
    pub rho_r_points: usize,
}

impl<T: Real> DesignConfig<T> {
    /// Defaults: `Q = I`, `P_y = I`, automatic α and `K_v`, 200 grid points.
    pub fn new(plant: &PlantModel<T>, interactor: InteractorSpec<T>, filter: FilterSpec<T>, kg: Matrix<T>, r_bound: T) -> Self {
        Self {
            interactor,
            filter,
            kg,
            r_bound,
            q: Matrix::identity(plant.n()),
            p_y: Matrix::identity(plant.p()),
            eps_q: None,
            alpha: None,
            kv: None,
            kv_rate: T::one(),
            l_theta: None,
            l_sigma: None,
            y0_known: true,
            rho_r_points: 200,
        }
    }
}

/// `H = B̄(C_mB̄)†` and `A_H = (I − HC_m)A_m`. Fails if the annihilator
/// residual `(I − HC_m)B̄` exceeds `1e−10`.
pub fn compute_h_and_ah<T: Real>(plant: &PlantModel<T>, bbar: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let cmb = &plant.cm * bbar;
    let h = bbar * &pinv_left(&cmb)?;
    let proj = &Matrix::identity(plant.n()) - &(&h * &plant.cm);
    let residual = (&proj * bbar).norm_inf();
    if residual > lit::<T>(1e-10) * (T::one() + bbar.norm_inf()) {
        return Err(Error::InteractorMismatch {
            residual: to_f64(residual),
        });
    }
    Ok((h, &proj * &plant.am))
}

/// Predictor gain `K_v`, `A_v = A_H + K_vC_m` and `P_v` from
/// `A_vᵀP_v + P_vA_v = −Q`.
pub fn synthesize_predictor_gain<T: Real>(
    ah: &Matrix<T>,
    cm: &Matrix<T>,
    kv_override: Option<&Matrix<T>>,
    q: &Matrix<T>,
    rate: T,
) -> Result<(Matrix<T>, Matrix<T>, Matrix<T>)> {
    let kv = match kv_override {
        Some(k) => {
            if k.shape() != (ah.rows(), cm.rows()) {
                return Err(Error::Config("K_v override must be n×p".into()));
            }
            k.clone()
        }
        None => {
            require_detectable(ah, cm)?;
            place_output_injection(ah, cm, rate)?
        }
    };
    let av = ah + &(&kv * cm);
    require_hurwitz(&av)?;
    let pv = solve_lyapunov(&av, q)?;
    Ok((kv, av, pv))
}

/// `κ_m = sup_t ‖e^{A_m t}‖` (sampled), `κ_y`, `κ_v`; also returns `P̄_v`.
#[derive(Debug, Clone, PartialEq)]
pub struct Kappas<T> {
    pub kappa_m: T,
    pub kappa_y: T,
    pub kappa_v: T,
    pub pv_bar: Matrix<T>,
}

pub fn kappa_constants<T: Real>(
    am: &Matrix<T>,
    cm: &Matrix<T>,
    h: &Matrix<T>,
    pv: &Matrix<T>,
    py: &Matrix<T>,
    y0_known: bool,
) -> Result<Kappas<T>> {
    let n = am.rows();
    let kappa_m = sup_expm_norm(am)?;
    let proj = &Matrix::identity(n) - &(h * cm);
    let pv_bar = if y0_known {
        (&(&proj.transpose() * pv) * &proj).symmetrize()
    } else {
        pv.clone()
    };
    let (_, pbar_max) = symmetric_extremes(&pv_bar)?;
    let (py_min, _) = symmetric_extremes(py)?;
    let (pv_min, _) = symmetric_extremes(pv)?;
    let nn = lit::<T>(n as f64);
    Ok(Kappas {
        kappa_m,
        kappa_y: (nn * pbar_max / py_min).sqrt(),
        kappa_v: (nn * pbar_max / pv_min).sqrt(),
        pv_bar,
    })
}

/// Max of `‖e^{At}‖∞` over a grid fine enough for the fastest mode and
/// long enough for the slowest to decay by `e^{−40}`.
fn sup_expm_norm<T: Real>(a: &Matrix<T>) -> Result<T> {
    require_hurwitz(a)?;
    let eig = eigenvalues(a)?;
    let slow = -spectral_abscissa(a)?;
    let fast = eig.iter().map(|l| l.norm()).fold(slow, T::max);
    let horizon = lit::<T>(40.0) / slow;
    let mut dt = T::one() / (lit::<T>(50.0) * fast);
    let max_steps = 200_000usize;
    if horizon / dt > lit(max_steps as f64) {
        dt = horizon / lit(max_steps as f64);
    }
    let step = expm(a, dt);
    let mut e = Matrix::identity(a.rows());
    let mut best = T::one();
    let mut t = T::zero();
    while t < horizon {
        e = &e * &step;
        t += dt;
        best = best.max(e.norm_inf());
    }
    Ok(best)
}

/// `d̄_ρx` and `b̄_ρx` with the `L1` norm of `T(s)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthBounds<T> {
    pub d_bar: T,
    pub b_bar: T,
    pub t_l1: T,
}

pub fn uncertainty_growth_bounds<T: Real>(
    plant: &PlantSpec<T>,
    z: &InteractorRealization<T>,
    rho_x: T,
) -> Result<GrowthBounds<T>> {
    let n = plant.model.n();
    let nz = z.nz();
    let dz_norm = z.dz.norm_inf();
    if nz == 0 && dz_norm == T::zero() {
        return Err(Error::DegenerateInteractor);
    }
    let d = (plant.d_of_delta)(rho_x);
    let (cz_tz, t_l1) = if nz > 0 {
        (&z.cz * &pinv_left(&z.tz)?, l1_norm(&z.t_system())?)
    } else {
        (Matrix::zeros(plant.model.m(), n), T::zero())
    };
    let mut d_bar = T::zero();
    for w in plant.omega_probes() {
        let tg = Matrix::hstack(&[&Matrix::identity(n), &z.tz.scale(w)]);
        let v = (&cz_tz * &tg).norm_inf() + dz_norm * tg.norm_inf() * d;
        d_bar = d_bar.max(v);
    }
    let b_bar = cz_tz.norm_inf() * rho_x + dz_norm * t_l1 * d * d * rho_x + dz_norm * (t_l1 * d + T::one()) * plant.b0;
    Ok(GrowthBounds { d_bar, b_bar, t_l1 })
}

/// `(α_φ, α_y)` for a given α.
pub fn alpha_condition<T: Real>(
    m: usize,
    d_bar: T,
    eps_q: T,
    py: &Matrix<T>,
    cmb: &Matrix<T>,
    alpha: T,
) -> Result<(T, T)> {
    let alpha_phi = alpha_phi(m, d_bar, eps_q, py, cmb)?;
    let alpha_y = lit::<T>(2.0) * alpha - alpha_phi;
    if !(alpha_y > T::zero()) {
        return Err(Error::AlphaTooSmall {
            alpha_y: to_f64(alpha_y),
            min_alpha: to_f64(alpha_phi / lit(2.0)),
        });
    }
    Ok((alpha_phi, alpha_y))
}

fn alpha_phi<T: Real>(m: usize, d_bar: T, eps_q: T, py: &Matrix<T>, cmb: &Matrix<T>) -> Result<T> {
    let sqrt_py = cholesky_upper(py)?;
    let s = norm2(&(&sqrt_py * cmb))?;
    Ok(lit::<T>(m as f64) * d_bar * d_bar / eps_q * s * s)
}

/// Outcome of the `ρ_r` search.
#[derive(Debug, Clone, PartialEq)]
pub struct Feasibility<T> {
    pub feasible: bool,
    pub rho_r: T,
    /// `min_ω [(ρ_r − ρ_ext − ρ_int)/(L ρ_r) − ‖G‖]`; positive iff feasible.
    pub margin: T,
    pub l_rho_r: T,
    /// Worst case over ω.
    pub rho_ext: T,
    pub rho_int: T,
    pub diagnosis: String,
}

/// Per-ω ingredients of the feasibility inequality.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityTerms<T> {
    pub g_l1: T,
    pub rho_ext: T,
    pub rho_int: T,
}

/// Log-grid search for `ρ_r` over `[E, 10³E]`, `E = max_ω(ρ_ext + ρ_int)`.
/// If some grid point is feasible the one with the largest margin is kept;
/// otherwise the point with the smallest relative violation
/// `max_ω (‖G‖Lρ_r + ρ_ext + ρ_int)/ρ_r − 1`, because the margin itself is
/// nearly flat there and does not single out a point.
pub fn search_rho_r<T: Real>(plant: &PlantSpec<T>, terms: &[FeasibilityTerms<T>], points: usize) -> Feasibility<T> {
    let e = terms
        .iter()
        .map(|t| t.rho_ext + t.rho_int)
        .fold(T::zero(), T::max);
    let e = if e > T::zero() { e } else { T::one() };
    let points = points.max(2);
    let eval = |rho_r: T| -> (T, T, T) {
        let l = plant.lipschitz(rho_r);
        let mut margin = T::infinity();
        let mut violation = T::neg_infinity();
        for t in terms {
            let num = rho_r - t.rho_ext - t.rho_int;
            let rhs = if l > T::zero() {
                num / (l * rho_r)
            } else if num > T::zero() {
                T::infinity()
            } else {
                num / rho_r
            };
            margin = margin.min(rhs - t.g_l1);
            violation = violation.max((t.g_l1 * l * rho_r + t.rho_ext + t.rho_int) / rho_r - T::one());
        }
        (margin, violation, l)
    };
    let grid: Vec<(T, T, T, T)> = (0..points)
        .map(|k| {
            let rho_r = e * lit::<T>(1e3).powf(lit::<T>(k as f64 / (points - 1) as f64));
            let (mg, v, l) = eval(rho_r);
            (rho_r, mg, v, l)
        })
        .collect();
    let any_feasible = grid.iter().any(|g| g.1 > T::zero());
    let mut best = grid[0];
    for &g in &grid[1..] {
        let better = if any_feasible { g.1 > best.1 } else { g.2 < best.2 };
        if better {
            best = g;
        }
    }
    let (rho_r, margin, _, l_rho_r) = best;
    let rho_ext = terms.iter().map(|t| t.rho_ext).fold(T::zero(), T::max);
    let rho_int = terms.iter().map(|t| t.rho_int).fold(T::zero(), T::max);
    let g = terms.iter().map(|t| t.g_l1).fold(T::zero(), T::max);
    let nonlinear = g * l_rho_r * rho_r;
    let dominant = if nonlinear >= rho_ext && nonlinear >= rho_int {
        "‖G‖·L·ρ_r (uncertainty growth through G)"
    } else if rho_ext >= rho_int {
        "ρ_ext (reference and b0 through H_r, G)"
    } else {
        "ρ_int (initial-condition terms κ_m, κ_x)"
    };
    let diagnosis = format!(
        "at rho_r = {:.4e}: ‖G‖·L·ρ_r = {:.4e}, ρ_ext = {:.4e}, ρ_int = {:.4e}; dominant: {}",
        to_f64(rho_r),
        to_f64(nonlinear),
        to_f64(rho_ext),
        to_f64(rho_int),
        dominant
    );
    Feasibility {
        feasible: any_feasible,
        rho_r,
        margin,
        l_rho_r,
        rho_ext,
        rho_int,
        diagnosis,
    }
}

/// Like [`search_rho_r`] but fails with `Infeasible` when no grid point
/// satisfies the inequality.
pub fn filter_feasibility<T: Real>(
    plant: &PlantSpec<T>,
    terms: &[FeasibilityTerms<T>],
    points: usize,
) -> Result<Feasibility<T>> {
    let f = search_rho_r(plant, terms, points);
    if f.feasible {
        Ok(f)
    } else {
        Err(Error::Infeasible(f.diagnosis))
    }
}

/// Everything the runtime and the reports need. Immutable once built.
#[derive(Debug, Clone)]
pub struct DesignArtifacts<T> {
    pub plant: PlantModel<T>,
    pub omega_bounds: (T, T),
    pub rho0: T,
    pub b0: T,
    pub gamma_bar: T,
    pub r_bound: T,
    pub interactor: InteractorRealization<T>,
    pub h: Matrix<T>,
    pub ah: Matrix<T>,
    pub kv: Matrix<T>,
    pub av: Matrix<T>,
    pub pv: Matrix<T>,
    pub pv_bar: Matrix<T>,
    pub lyapunov_residual: T,
    pub q: Matrix<T>,
    pub p_y: Matrix<T>,
    pub eps_q: T,
    pub alpha: T,
    pub alpha_phi: T,
    pub alpha_y: T,
    pub kappa_m: T,
    pub kappa_y: T,
    pub kappa_v: T,
    pub kappa_x: T,
    pub kg: Matrix<T>,
    pub filter: FilterSpec<T>,
    /// `D(s)·I_m`
    pub d_filter: StateSpace<T>,
    pub h0: StateSpace<T>,
    /// `T(s) = T_z(sI − A_z)⁻¹B_z`
    pub t_sys: StateSpace<T>,
    /// `D(s)Z⁻¹(s)`, driven by `η̂_t − r_z`.
    pub ctrl_filter: StateSpace<T>,
    /// `Z(s)K_g`, producing `r_z` from `r`.
    pub rz_filter: StateSpace<T>,
    /// Filters at `ω_l`, the midpoint and `ω_u`.
    pub filters: Vec<OmegaFilters<T>>,
    /// Entrywise worst case of the filter norms over the probes.
    pub norms: FilterNorms<T>,
    pub feasibility: Feasibility<T>,
    pub l_rho_r: T,
    pub rho_r: T,
    pub rho_x: T,
    pub rho_ext: T,
    pub rho_int: T,
    pub d_bar: T,
    pub b_bar: T,
    pub l_theta: T,
    pub l_sigma: T,
    pub y0_known: bool,
    /// `C_mB̄`
    pub cmb: Matrix<T>,
    /// `C_mA_m`
    pub cm_am: Matrix<T>,
    /// `P_v⁻¹A_mᵀC_mᵀP_y`
    pub pred_correction: Matrix<T>,
    /// `B̄ᵀC_mᵀP_y`
    pub ey_gain: Matrix<T>,
    pub bounds: BoundReport<T>,
}

impl<T: Real> DesignArtifacts<T> {
    pub fn feasible(&self) -> bool {
        self.feasibility.feasible
    }

    pub fn require_feasible(&self) -> Result<()> {
        if self.feasible() {
            Ok(())
        } else {
            Err(Error::Infeasible(self.feasibility.diagnosis.clone()))
        }
    }

    /// `C_0(s)` at a given ω, for the reference system.
    pub fn c0_at(&self, omega: T) -> Result<StateSpace<T>> {
        c0_system(&self.filter, omega, self.plant.m())
    }

    /// Envelope of `‖ỹ(t)‖`: `κ_y e^{−λ_1 t/2}‖x_0‖ + sqrt(θ_1/λ_min(P_y))/√Γ`.
    pub fn envelope(&self, t: T, x0_norm: T, gamma: T) -> T {
        self.kappa_y * (-self.bounds.lambda1 * t / lit(2.0)).exp() * x0_norm + self.envelope_steady(gamma)
    }

    pub fn envelope_steady(&self, gamma: T) -> T {
        (self.bounds.theta1 / self.bounds.py_min).sqrt() / gamma.sqrt()
    }

    /// Human-readable constant table.
    pub fn report_text(&self) -> String {
        let b = &self.bounds;
        let mut s = String::new();
        let mut row = |k: &str, v: T| s.push_str(&format!("{k:<12} {:>14.6e}\n", to_f64(v)));
        row("omega_l", self.omega_bounds.0);
        row("omega_u", self.omega_bounds.1);
        row("eps_q", self.eps_q);
        row("alpha", self.alpha);
        row("alpha_phi", self.alpha_phi);
        row("alpha_y", self.alpha_y);
        row("kappa_m", self.kappa_m);
        row("kappa_y", self.kappa_y);
        row("kappa_v", self.kappa_v);
        row("kappa_x", self.kappa_x);
        row("|G|_L1", self.norms.g);
        row("|Hr|_L1", self.norms.hr);
        row("|H1|_L1", self.norms.h1);
        row("|H2|_L1", self.norms.h2);
        row("|C0|_L1", self.norms.c0);
        row("|C0 Kg|_L1", self.norms.c0_kg);
        row("|C1|_L1", self.norms.c1);
        row("|C2|_L1", self.norms.c2);
        row("d_bar", self.d_bar);
        row("b_bar", self.b_bar);
        row("l_theta", self.l_theta);
        row("l_sigma", self.l_sigma);
        row("rho_r", self.rho_r);
        row("rho_x", self.rho_x);
        row("L_rho_r", self.l_rho_r);
        row("rho_ext", self.rho_ext);
        row("rho_int", self.rho_int);
        row("margin", self.feasibility.margin);
        row("rho_rx", b.rho_rx);
        row("rho_ru", b.rho_ru);
        row("gamma_x0", b.gamma_x0);
        row("gamma_u0", b.gamma_u0);
        row("gamma_x", b.gamma_x);
        row("gamma_u", b.gamma_u);
        row("eps_gamma", b.eps_gamma);
        row("rho_u", b.rho_u);
        row("rho_dx", b.rho_dx);
        row("rho_du", b.rho_du);
        row("lambda1", b.lambda1);
        row("theta0", b.theta0);
        row("theta1", b.theta1);
        row("gamma_min", b.gamma_min);
        let verdict = if self.feasible() { "feasible" } else { "INFEASIBLE" };
        s.push_str(&format!("{verdict}: {}\n", self.feasibility.diagnosis));
        s
    }
}

/// Runs the full pipeline. An infeasible filter condition does not abort:
/// the least-violating `ρ_r` is kept and `feasibility.feasible` is false.
pub fn synthesize<T: Real>(plant: &PlantSpec<T>, cfg: &DesignConfig<T>) -> Result<DesignArtifacts<T>> {
    plant.validate()?;
    let model = &plant.model;
    let (n, m) = (model.n(), model.m());
    if cfg.kg.rows() != m {
        return Err(Error::Config("K_g must have m rows".into()));
    }
    if cfg.q.shape() != (n, n) || cfg.p_y.shape() != (model.p(), model.p()) {
        return Err(Error::Config("Q must be n×n and P_y p×p".into()));
    }
    let z = solve_coupling(model, &cfg.interactor)?;
    let (h, ah) = compute_h_and_ah(model, &z.bbar)?;
    let (kv, av, pv) = synthesize_predictor_gain(&ah, &model.cm, cfg.kv.as_ref(), &cfg.q, cfg.kv_rate)?;
    let lyap_res = lyapunov_residual(&av, &pv, &cfg.q);
    let (q_min, _) = symmetric_extremes(&cfg.q)?;
    let eps_q = cfg.eps_q.unwrap_or(lit::<T>(0.1) * q_min);
    if !(eps_q > T::zero() && eps_q < q_min) {
        return Err(Error::Config(format!("eps_q must lie in (0, λ_min(Q) = {q_min})")));
    }
    let (py_min, _) = symmetric_extremes(&cfg.p_y)?;
    let (pv_min, pv_max) = symmetric_extremes(&pv)?;
    if !(py_min > T::zero()) {
        return Err(Error::NotPositiveDefinite {
            index: 0,
            pivot: to_f64(py_min),
        });
    }
    let kap = kappa_constants(&model.am, &model.cm, &h, &pv, &cfg.p_y, cfg.y0_known)?;
    let cmb = &model.cm * &z.bbar;
    let cmb_pinv = pinv_left(&cmb)?;

    // d̄ depends on ρ_x only through D_z; α depends on d̄ and the filters on
    // α, so iterate to a fixed point (one pass when D_z = 0).
    let mut rho_x = plant.rho0 + plant.gamma_bar;
    let mut state = None;
    for _ in 0..20 {
        let growth = uncertainty_growth_bounds(plant, &z, rho_x)?;
        let phi = alpha_phi(m, growth.d_bar, eps_q, &cfg.p_y, &cmb)?;
        let alpha = cfg.alpha.unwrap_or_else(|| phi.max(T::one()));
        let filters = plant
            .omega_probes()
            .iter()
            .map(|&w| omega_filters(model, &z, &cfg.filter, w, alpha, &cfg.kg, &cmb_pinv))
            .collect::<Result<Vec<_>>>()?;
        let norms = filters
            .iter()
            .skip(1)
            .fold(filters[0].norms, |acc, f| acc.max(&f.norms));
        let kappa_x = norms.h1 * kap.kappa_y + norms.h2 * kap.kappa_v;
        let rho_int = (kap.kappa_m + kappa_x) * plant.rho0;
        let terms: Vec<_> = filters
            .iter()
            .map(|f| FeasibilityTerms {
                g_l1: f.norms.g,
                rho_ext: f.norms.hr * cfg.r_bound + f.norms.g * plant.b0,
                rho_int,
            })
            .collect();
        let feas = search_rho_r(plant, &terms, cfg.rho_r_points);
        let new_rho_x = feas.rho_r + plant.gamma_bar;
        let settled = z.dz.max_abs() == T::zero() || (new_rho_x - rho_x).abs() <= lit::<T>(1e-9) * rho_x;
        rho_x = new_rho_x;
        state = Some((alpha, phi, filters, norms, kappa_x, feas));
        if settled {
            break;
        }
    }
    let (alpha, phi, filters, norms, kappa_x, feas) = state.expect("at least one pass");
    let alpha_y = lit::<T>(2.0) * alpha - phi;
    if !(alpha_y > T::zero()) {
        return Err(Error::AlphaTooSmall {
            alpha_y: to_f64(alpha_y),
            min_alpha: to_f64(phi / lit(2.0)),
        });
    }
    let growth = uncertainty_growth_bounds(plant, &z, rho_x)?;
    let spectral_radius = eigenvalues(&model.am)?.iter().map(|l| l.norm()).fold(T::zero(), T::max);
    let l_theta = cfg.l_theta.unwrap_or(growth.d_bar * spectral_radius);
    let l_sigma = cfg
        .l_sigma
        .unwrap_or((plant.b_of_delta)(rho_x) + growth.d_bar * model.am.norm_inf() * rho_x);

    let bounds = BoundReport::compute(&bounds::BoundInputs {
        m,
        omega_u: plant.omega_bounds.1,
        rho0: plant.rho0,
        b0: plant.b0,
        gamma_bar: plant.gamma_bar,
        r_bound: cfg.r_bound,
        rho_r: feas.rho_r,
        l_rho_r: feas.l_rho_r,
        rho_int: (kap.kappa_m + kappa_x) * plant.rho0,
        kappa_m: kap.kappa_m,
        kappa_x,
        kappa_y: kap.kappa_y,
        kappa_v: kap.kappa_v,
        norms,
        py_min,
        pv_min,
        pv_max,
        q_min,
        eps_q,
        alpha_y,
        d_bar: growth.d_bar,
        b_bar: growth.b_bar,
        l_theta,
        l_sigma,
    });

    let pred_correction = &(&(&inverse(&pv)? * &model.am.transpose()) * &model.cm.transpose()) * &cfg.p_y;
    let ey_gain = &(&z.bbar.transpose() * &model.cm.transpose()) * &cfg.p_y;
    let ctrl_filter = control_filter(&cfg.filter, &z, m)?;
    let rz_filter = z.z_system().postmul(&cfg.kg)?;
    Ok(DesignArtifacts {
        plant: model.clone(),
        omega_bounds: plant.omega_bounds,
        rho0: plant.rho0,
        b0: plant.b0,
        gamma_bar: plant.gamma_bar,
        r_bound: cfg.r_bound,
        h,
        ah,
        kv,
        av,
        pv,
        pv_bar: kap.pv_bar,
        lyapunov_residual: lyap_res,
        q: cfg.q.clone(),
        p_y: cfg.p_y.clone(),
        eps_q,
        alpha,
        alpha_phi: phi,
        alpha_y,
        kappa_m: kap.kappa_m,
        kappa_y: kap.kappa_y,
        kappa_v: kap.kappa_v,
        kappa_x,
        kg: cfg.kg.clone(),
        filter: cfg.filter.clone(),
        d_filter: cfg.filter.system(m)?,
        h0: h0_system(model),
        t_sys: z.t_system(),
        ctrl_filter,
        rz_filter,
        filters,
        norms,
        l_rho_r: feas.l_rho_r,
        rho_r: feas.rho_r,
        rho_x,
        rho_ext: feas.rho_ext,
        rho_int: (kap.kappa_m + kappa_x) * plant.rho0,
        feasibility: feas,
        d_bar: growth.d_bar,
        b_bar: growth.b_bar,
        l_theta,
        l_sigma,
        y0_known: cfg.y0_known,
        cmb,
        cm_am: &model.cm * &model.am,
        pred_correction,
        ey_gain,
        bounds,
        interactor: z,
    })
}
