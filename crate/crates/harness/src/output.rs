//! CSV traces, the plotting script and the design-report JSON.

use std::fs;
use std::path::Path;

use l1ofc::{Design, Mat};
use serde_json::{json, Value};

use crate::error::{HarnessError, Result};
use crate::sim::SimTrace;

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    }
}

pub fn csv_header(n: usize, p: usize, m: usize) -> Vec<String> {
    let mut h = vec!["t".to_string()];
    let mut push = |prefix: &str, k: usize| h.extend((1..=k).map(|i| format!("{prefix}{i}")));
    push("x", n);
    push("y", p);
    push("u", m);
    push("yref", p);
    push("xref", n);
    h.push("ytilde_norm".into());
    h.push("envelope".into());
    h.push("omega_hat".into());
    h.extend((1..=m).map(|i| format!("theta_hat{i}")));
    h.extend((1..=m).map(|i| format!("sigma_hat{i}")));
    h
}

pub fn write_csv(trace: &SimTrace, path: &Path) -> Result<()> {
    let Some(first) = trace.samples.first() else {
        return Err(HarnessError::Config("empty trace".into()));
    };
    let (n, p, m) = (first.x.len(), first.y.len(), first.u.len());
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(csv_header(n, p, m))?;
    for s in &trace.samples {
        let mut row = vec![s.t];
        row.extend(&s.x);
        row.extend(&s.y);
        row.extend(&s.u);
        row.extend(&s.y_ref);
        row.extend(&s.x_ref);
        row.push(s.ytilde_norm);
        row.push(s.envelope);
        row.push(s.omega_hat);
        row.extend(&s.theta_hat);
        row.extend(&s.sigma_hat);
        w.write_record(row.iter().map(|v| format!("{v:.9e}")))?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
"""Plots every trace CSV in this directory.

Per file: outputs against references, inputs, tracking and estimation
errors with the envelope, and the adaptive estimates.
"""
import glob
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

here = os.path.dirname(os.path.abspath(__file__))

for path in sorted(glob.glob(os.path.join(here, "*.csv"))):
    if path.endswith("sweep.csv") or path.endswith("delay_margin.csv"):
        continue
    data = np.genfromtxt(path, delimiter=",", names=True)
    cols = data.dtype.names
    pick = lambda prefix: [c for c in cols if c.startswith(prefix) and c[len(prefix):].isdigit()]
    t = data["t"]
    fig, ax = plt.subplots(2, 2, figsize=(11, 7), sharex=True)
    for y, yr in zip(pick("y"), pick("yref")):
        ax[0, 0].plot(t, data[y], label=y)
        ax[0, 0].plot(t, data[yr], "--", label=yr)
    ax[0, 0].set_title("outputs")
    ax[0, 0].legend(fontsize=7)
    for u in pick("u"):
        ax[0, 1].plot(t, data[u], label=u)
    ax[0, 1].set_title("input")
    xs = np.column_stack([data[c] for c in pick("x")])
    xr = np.column_stack([data[c] for c in pick("xref")])
    ax[1, 0].plot(t, np.abs(xr - xs).max(axis=1), label="|xref - x|")
    ax[1, 0].plot(t, data["ytilde_norm"], label="|ytilde|")
    ax[1, 0].plot(t, data["envelope"], ":", label="envelope")
    ax[1, 0].set_yscale("log")
    ax[1, 0].legend(fontsize=7)
    ax[1, 0].set_title("errors")
    ax[1, 1].plot(t, data["omega_hat"], label="omega_hat")
    for c in pick("theta_hat") + pick("sigma_hat"):
        ax[1, 1].plot(t, data[c], label=c)
    ax[1, 1].legend(fontsize=7)
    ax[1, 1].set_title("estimates")
    for a in ax[1]:
        a.set_xlabel("t [s]")
    fig.tight_layout()
    fig.savefig(path[:-4] + ".png", dpi=120)
    plt.close(fig)

sweep = os.path.join(here, "sweep.csv")
if os.path.exists(sweep):
    s = np.genfromtxt(sweep, delimiter=",", names=True)
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.loglog(s["gamma"], s["steady_tracking"], "o-", label="steady |xref - x|")
    ax.loglog(s["gamma"], s["steady_estimation"], "s-", label="steady |ytilde|")
    ax.set_xlabel("gamma")
    ax.legend()
    fig.tight_layout()
    fig.savefig(os.path.join(here, "sweep.png"), dpi=120)
"#;

pub fn write_plot_script(dir: &Path) -> Result<()> {
    let path = dir.join("plot.py");
    fs::write(&path, PLOT_SCRIPT).map_err(io_err(&path))
}

fn mat(m: &Mat) -> Value {
    json!(m.to_rows_f64())
}

/// Design constants and matrices; matrices as nested row-major arrays.
pub fn design_report(d: &Design) -> Value {
    let b = &d.bounds;
    json!({
        "feasible": d.feasible(),
        "diagnosis": d.feasibility.diagnosis,
        "matrices": {
            "A_m": mat(&d.plant.am),
            "B_m": mat(&d.plant.bm),
            "C_m": mat(&d.plant.cm),
            "A_z": mat(&d.interactor.az),
            "B_z": mat(&d.interactor.bz),
            "C_z": mat(&d.interactor.cz),
            "D_z": mat(&d.interactor.dz),
            "T_z": mat(&d.interactor.tz),
            "B_bar": mat(&d.interactor.bbar),
            "H": mat(&d.h),
            "A_H": mat(&d.ah),
            "K_v": mat(&d.kv),
            "A_v": mat(&d.av),
            "P_v": mat(&d.pv),
            "Q": mat(&d.q),
            "P_y": mat(&d.p_y),
            "K_g": mat(&d.kg),
        },
        "constants": {
            "omega_bounds": [d.omega_bounds.0, d.omega_bounds.1],
            "lyapunov_residual": d.lyapunov_residual,
            "eps_q": d.eps_q,
            "alpha": d.alpha,
            "alpha_phi": d.alpha_phi,
            "alpha_y": d.alpha_y,
            "kappa_m": d.kappa_m,
            "kappa_y": d.kappa_y,
            "kappa_v": d.kappa_v,
            "kappa_x": d.kappa_x,
            "d_bar": d.d_bar,
            "b_bar": d.b_bar,
            "l_theta": d.l_theta,
            "l_sigma": d.l_sigma,
            "rho_r": d.rho_r,
            "rho_x": d.rho_x,
            "L_rho_r": d.l_rho_r,
            "rho_ext": d.rho_ext,
            "rho_int": d.rho_int,
            "margin": d.feasibility.margin,
        },
        "norms": {
            "G": d.norms.g,
            "H_r": d.norms.hr,
            "H_1": d.norms.h1,
            "H_2": d.norms.h2,
            "C_0": d.norms.c0,
            "C_0K_g": d.norms.c0_kg,
            "C_1": d.norms.c1,
            "C_2": d.norms.c2,
        },
        "bounds": {
            "one_minus_gl": b.one_minus_gl,
            "rho_rx": b.rho_rx,
            "rho_ru": b.rho_ru,
            "gamma_x0": b.gamma_x0,
            "gamma_u0": b.gamma_u0,
            "gamma_x": b.gamma_x,
            "gamma_u": b.gamma_u,
            "eps_gamma": b.eps_gamma,
            "rho_u": b.rho_u,
            "rho_dx": b.rho_dx,
            "rho_du": b.rho_du,
            "lambda1": b.lambda1,
            "theta0": b.theta0,
            "theta1": b.theta1,
            "gamma_min": b.gamma_min,
            "certified": b.certified,
        },
    })
}

pub fn write_design_report(d: &Design, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(&design_report(d))?;
    fs::write(path, text).map_err(io_err(path))
}
