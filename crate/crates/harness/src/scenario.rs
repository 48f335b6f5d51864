//! Scenario files and their translation into a plant, a design and a
//! simulation setup.

use std::path::Path;
use std::sync::Arc;

use l1ofc::design::{synthesize, DesignConfig, FilterSpec, PlantSpec};
use l1ofc::interactor::{build_scalar_interactor, InteractorSpec, PlantModel};
use l1ofc::runtime::AdaptationGains;
use l1ofc::{Design, Mat, System};
use serde::{Deserialize, Serialize};

use crate::error::{config, HarnessError, Result};
use crate::pendulum::{Disturbance, FrictionForm, Pendulum, PendulumParams, LQR_GAIN};
use crate::uncertainty::{DeclaredBounds, UncertaintyBounds, UncertaintyKind};

pub type Rows = Vec<Vec<f64>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantSection {
    pub am: Rows,
    pub bm: Rows,
    pub cm: Rows,
    /// True input gain used by the simulation.
    pub omega: f64,
    pub omega_bounds: [f64; 2],
    pub rho0: f64,
    #[serde(default = "default_gamma_bar")]
    pub gamma_bar: f64,
}

fn default_gamma_bar() -> f64 {
    0.1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct ExplicitInteractor {
    pub Az: Rows,
    pub Bz: Rows,
    pub Cz: Rows,
    pub Dz: Rows,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InteractorSection {
    Explicit { explicit: ExplicitInteractor },
    Scalar { poles: Vec<f64>, dc_gain: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterSection {
    pub gain: f64,
    pub poles: Vec<f64>,
    pub integrators: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SineTerm {
    pub amp: f64,
    pub freq: f64,
    #[serde(default)]
    pub phase: f64,
}

/// Scalar reference command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "snake_case")]
pub enum Reference {
    Const { value: f64 },
    SinSum { offset: f64, terms: Vec<SineTerm> },
    /// Piecewise constant: `values[i]` from `times[i]` on, zero before the first.
    Steps { times: Vec<f64>, values: Vec<f64> },
}

impl Reference {
    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Const { value } => *value,
            Self::SinSum { offset, terms } => offset + terms.iter().map(|s| s.amp * (s.freq * t + s.phase).sin()).sum::<f64>(),
            Self::Steps { times, values } => times
                .iter()
                .zip(values)
                .take_while(|(&ti, _)| ti <= t)
                .last()
                .map_or(0.0, |(_, &v)| v),
        }
    }

    /// Declared amplitude bound `‖r‖_{L∞}`.
    pub fn bound(&self) -> f64 {
        match self {
            Self::Const { value } => value.abs(),
            Self::SinSum { offset, terms } => offset.abs() + terms.iter().map(|s| s.amp.abs()).sum::<f64>(),
            Self::Steps { values, .. } => values.iter().fold(0.0, |m, v| m.max(v.abs())),
        }
    }

    fn validate(&self) -> Result<()> {
        if let Self::Steps { times, values } = self {
            if times.len() != values.len() || times.windows(2).any(|w| w[1] < w[0]) {
                return Err(config("steps need matching, sorted times and values"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaSection {
    pub omega: f64,
    pub theta: f64,
    pub sigma: f64,
}

impl From<GammaSection> for AdaptationGains<f64> {
    fn from(g: GammaSection) -> Self {
        AdaptationGains {
            omega: g.omega,
            theta: g.theta,
            sigma: g.sigma,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Overrides {
    #[serde(rename = "K_v")]
    pub kv: Option<Rows>,
    #[serde(rename = "Q")]
    pub q: Option<Rows>,
    #[serde(rename = "P_y")]
    pub p_y: Option<Rows>,
    pub alpha: Option<f64>,
    pub eps_q: Option<f64>,
    pub eps_proj: Option<f64>,
    pub l_theta: Option<f64>,
    pub l_sigma: Option<f64>,
    #[serde(rename = "inertia_I")]
    pub inertia_i: Option<f64>,
    /// Design against another uncertainty's bounds (no retuning).
    pub design_uncertainty: Option<UncertaintyKind>,
    pub kv_rate: Option<f64>,
}

/// Physical setup of the cart-pole scenarios.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendulumSection {
    #[serde(default)]
    pub perturbed: bool,
    #[serde(default)]
    pub friction: bool,
    #[serde(default)]
    pub friction_form: FrictionForm,
    #[serde(default)]
    pub disturbance: Disturbance,
    /// State feedback kept in the loop under the adaptive controller.
    #[serde(default = "default_inner_gain")]
    pub inner_gain: Vec<f64>,
}

fn default_inner_gain() -> Vec<f64> {
    LQR_GAIN.to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    pub name: String,
    pub plant: PlantSection,
    pub interactor: InteractorSection,
    pub filter: FilterSection,
    pub kg: Rows,
    pub reference: Reference,
    pub x0: Vec<f64>,
    pub horizon_s: f64,
    pub step_s: f64,
    pub gamma: GammaSection,
    pub uncertainty: UncertaintyKind,
    #[serde(default)]
    pub uncertainty_bounds: Option<DeclaredBounds>,
    #[serde(default)]
    pub pendulum: Option<PendulumSection>,
    #[serde(default)]
    pub baseline: Option<Vec<f64>>,
    #[serde(default)]
    pub overrides: Overrides,
}

fn matrix(name: &str, rows: &Rows) -> Result<Mat> {
    let cols = rows.first().map_or(0, Vec::len);
    if rows.is_empty() || cols == 0 || rows.iter().any(|r| r.len() != cols) {
        return Err(config(format!("{name} must be a non-empty rectangular array")));
    }
    if rows.iter().flatten().any(|v| !v.is_finite()) {
        return Err(config(format!("{name} has non-finite entries")));
    }
    Ok(Mat::from_rows(rows))
}

/// Simulated plant.
#[derive(Debug, Clone)]
pub enum SimPlant {
    /// `ẋ = A_m x + B_m(ω u + f(x, t))`, `y = C_m x`.
    Linear { omega: f64, f: UncertaintyKind },
    Pendulum { model: Pendulum, inner_gain: Vec<f64> },
}

/// A loaded scenario with its synthesized design.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub file: ScenarioFile,
    pub plant: PlantSpec<f64>,
    pub design: Arc<Design>,
    pub sim_plant: SimPlant,
    pub gains: AdaptationGains<f64>,
    pub eps_proj: f64,
}

impl Scenario {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| config(e.to_string()))?;
        Self::build(file)
    }

    pub fn build(file: ScenarioFile) -> Result<Self> {
        let model = PlantModel::new(matrix("am", &file.plant.am)?, matrix("bm", &file.plant.bm)?, matrix("cm", &file.plant.cm)?)?;
        let (n, m, p) = (model.n(), model.m(), model.p());
        if !(file.horizon_s > 0.0 && file.step_s > 0.0 && file.step_s < file.horizon_s) {
            return Err(config("need 0 < step_s < horizon_s"));
        }
        if file.x0.len() != n || file.x0.iter().any(|v| !v.is_finite()) {
            return Err(config(format!("x0 must have {n} finite entries")));
        }
        let x0_norm = file.x0.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        if x0_norm > file.plant.rho0 {
            return Err(config(format!("‖x0‖ = {x0_norm} exceeds rho0 = {}", file.plant.rho0)));
        }
        file.reference.validate()?;
        let kg = matrix("kg", &file.kg)?;
        if kg.shape() != (m, 1) {
            return Err(config(format!("kg must be {m}×1 (scalar reference)")));
        }

        let design_kind = file.overrides.design_uncertainty.unwrap_or(file.uncertainty);
        let bounds: UncertaintyBounds = match (&file.uncertainty_bounds, design_kind.builtin_bounds()) {
            (Some(declared), _) => declared.to_bounds(),
            (None, Some(b)) => b,
            (None, None) => return Err(config("pendulum uncertainty needs declared uncertainty_bounds")),
        };
        if matches!(file.uncertainty, UncertaintyKind::F1 | UncertaintyKind::F2) && m != 1 {
            return Err(config("f1/f2 are scalar uncertainties (m = 1)"));
        }
        let plant = PlantSpec {
            model: model.clone(),
            omega_bounds: (file.plant.omega_bounds[0], file.plant.omega_bounds[1]),
            f: file.uncertainty.function(),
            b0: bounds.b0,
            d_of_delta: bounds.d_of_delta,
            b_of_delta: bounds.b_of_delta,
            rho0: file.plant.rho0,
            gamma_bar: file.plant.gamma_bar,
        };

        let interactor = match &file.interactor {
            InteractorSection::Scalar { poles, dc_gain } => build_scalar_interactor(poles, *dc_gain, m)?,
            InteractorSection::Explicit { explicit: e } => InteractorSpec::explicit(System {
                a: matrix("Az", &e.Az)?,
                b: matrix("Bz", &e.Bz)?,
                c: matrix("Cz", &e.Cz)?,
                d: matrix("Dz", &e.Dz)?,
            }),
        };
        let filter = FilterSpec {
            gain: file.filter.gain,
            poles: file.filter.poles.clone(),
            integrators: file.filter.integrators,
        };
        let mut cfg = DesignConfig::new(&model, interactor, filter, kg, file.reference.bound());
        let o = &file.overrides;
        if let Some(q) = &o.q {
            cfg.q = matrix("Q", q)?;
        }
        if let Some(py) = &o.p_y {
            cfg.p_y = matrix("P_y", py)?;
        }
        if let Some(kv) = &o.kv {
            cfg.kv = Some(matrix("K_v", kv)?);
        }
        if cfg.q.shape() != (n, n) || cfg.p_y.shape() != (p, p) {
            return Err(config("Q must be n×n and P_y p×p"));
        }
        cfg.alpha = o.alpha;
        cfg.eps_q = o.eps_q;
        cfg.l_theta = o.l_theta;
        cfg.l_sigma = o.l_sigma;
        if let Some(rate) = o.kv_rate {
            cfg.kv_rate = rate;
        }
        let design = Arc::new(synthesize(&plant, &cfg)?);

        let sim_plant = match (&file.pendulum, file.uncertainty) {
            (Some(ps), UncertaintyKind::Pendulum) => {
                if n != 4 || m != 1 || ps.inner_gain.len() != 4 {
                    return Err(config("pendulum scenarios use the 4-state single-input model"));
                }
                let bm = &file.plant.bm;
                let mut params = PendulumParams::nominal();
                params.inertia = o.inertia_i.unwrap_or(params.inertia);
                if params.inertia < 0.0 || bm[1][0] == 0.0 || bm[3][0] == 0.0 {
                    return Err(config("invalid pendulum inertia or input matrix"));
                }
                if ps.perturbed {
                    params = params.perturbed();
                }
                SimPlant::Pendulum {
                    model: Pendulum::new(params, ps.friction.then_some(ps.friction_form), ps.disturbance),
                    inner_gain: ps.inner_gain.clone(),
                }
            }
            (None, UncertaintyKind::Pendulum) | (Some(_), _) => {
                return Err(config("a pendulum section goes with uncertainty \"pendulum\""))
            }
            (None, kind) => SimPlant::Linear {
                omega: file.plant.omega,
                f: kind,
            },
        };
        if let Some(b) = &file.baseline {
            if b.len() != n {
                return Err(config(format!("baseline gain must have {n} entries")));
            }
        }
        let gains: AdaptationGains<f64> = file.gamma.into();
        if !(gains.min() > 0.0) {
            return Err(config("adaptation gains must be positive"));
        }
        Ok(Self {
            eps_proj: o.eps_proj.unwrap_or(0.1),
            file,
            plant,
            design,
            sim_plant,
            gains,
        })
    }

    /// Same design, different simulated uncertainty (linear plants only).
    pub fn with_uncertainty(&self, kind: UncertaintyKind) -> Result<Self> {
        let SimPlant::Linear { omega, .. } = self.sim_plant else {
            return Err(config("uncertainty swap applies to linear plants"));
        };
        let mut s = self.clone();
        s.sim_plant = SimPlant::Linear { omega, f: kind };
        s.plant.f = kind.function();
        s.file.uncertainty = kind;
        Ok(s)
    }

    pub fn x0_norm(&self) -> f64 {
        self.file.x0.iter().fold(0.0, |a, v| a.max(v.abs()))
    }
}
