//! Adaptation-gain sweeps and the input-delay margin search.

use l1ofc::design::performance_bounds;
use l1ofc::runtime::AdaptationGains;
use rayon::prelude::*;

use crate::error::{HarnessError, Result};
use crate::scenario::Scenario;
use crate::sim::{run_closed_loop, RunOptions, SimTrace};

/// Metrics of one sweep row. Steady values are maxima over the final 20%.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepMetrics {
    pub steady_tracking: f64,
    pub steady_estimation: f64,
    pub envelope_steady: f64,
    /// Every sample of `‖ỹ‖` lies below the envelope.
    pub under_envelope: bool,
}

#[derive(Debug)]
pub struct SweepRow {
    pub gamma: f64,
    /// `Some` when `Γ ≤ Γ_min`: the performance bounds are not certified.
    pub gamma_too_small: Option<l1ofc::Error>,
    pub result: Result<(SweepMetrics, SimTrace)>,
}

pub fn sweep_metrics(sc: &Scenario, trace: &SimTrace) -> SweepMetrics {
    let from = 0.8 * trace.horizon();
    SweepMetrics {
        steady_tracking: trace.max_tracking_after(from),
        steady_estimation: trace.max_ytilde_after(from),
        envelope_steady: sc.design.envelope_steady(trace.gains.min()),
        under_envelope: trace.samples.iter().all(|s| s.ytilde_norm <= s.envelope),
    }
}

/// One closed-loop run per uniform gain `Γ`, in parallel.
pub fn gamma_sweep(sc: &Scenario, gammas: &[f64], base: &RunOptions) -> Vec<SweepRow> {
    gammas
        .par_iter()
        .map(|&gamma| {
            let opts = RunOptions {
                gains: Some(AdaptationGains::uniform(gamma)),
                ..*base
            };
            let result = run_closed_loop(sc, &opts).map(|tr| (sweep_metrics(sc, &tr), tr));
            SweepRow {
                gamma,
                gamma_too_small: performance_bounds(&sc.design, gamma).err(),
                result,
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayMargin {
    /// Bracket midpoint.
    pub margin: f64,
    /// Largest delay found stable.
    pub stable: f64,
    /// Smallest delay found unstable.
    pub unstable: f64,
    /// No instability up to the range maximum; `margin` is a lower bound.
    pub unbounded: bool,
    pub runs: usize,
}

/// Bracket width at which the search stops.
pub const DELAY_TOLERANCE_S: f64 = 0.01;

/// `Ok(true)` when the run with the given input delay stays bounded.
pub fn is_stable_with_delay(sc: &Scenario, base: &RunOptions, delay_s: f64) -> Result<bool> {
    let opts = RunOptions { delay_s, ..*base };
    match run_closed_loop(sc, &opts) {
        Ok(_) => Ok(true),
        Err(HarnessError::Divergence { .. } | HarnessError::NonFiniteState { .. }) => Ok(false),
        Err(HarnessError::Core(l1ofc::Error::NonFiniteState { .. })) => Ok(false),
        Err(e) => Err(e),
    }
}

/// Smallest destabilizing input delay in `[0, max_delay]`, bracketed to
/// [`DELAY_TOLERANCE_S`]. Each round tests four interior points in parallel.
pub fn delay_margin_search(sc: &Scenario, max_delay: f64, base: &RunOptions) -> Result<DelayMargin> {
    if !(max_delay > DELAY_TOLERANCE_S) {
        return Err(HarnessError::Config("delay range must exceed the bracket tolerance".into()));
    }
    let mut runs = 2;
    if !is_stable_with_delay(sc, base, 0.0)? {
        return Err(HarnessError::UnstableBaseline);
    }
    if is_stable_with_delay(sc, base, max_delay)? {
        return Ok(DelayMargin {
            margin: max_delay,
            stable: max_delay,
            unstable: f64::INFINITY,
            unbounded: true,
            runs,
        });
    }
    let (mut lo, mut hi) = (0.0, max_delay);
    while hi - lo > DELAY_TOLERANCE_S {
        let probes: Vec<f64> = (1..=4).map(|i| lo + (hi - lo) * i as f64 / 5.0).collect();
        let stable = probes
            .par_iter()
            .map(|&d| is_stable_with_delay(sc, base, d))
            .collect::<Result<Vec<bool>>>()?;
        runs += probes.len();
        // first unstable probe closes the bracket from above
        match stable.iter().position(|s| !s) {
            Some(0) => hi = probes[0],
            Some(i) => {
                lo = probes[i - 1];
                hi = probes[i];
            }
            None => lo = probes[3],
        }
    }
    Ok(DelayMargin {
        margin: 0.5 * (lo + hi),
        stable: lo,
        unstable: hi,
        unbounded: false,
        runs,
    })
}
