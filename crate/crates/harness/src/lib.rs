//! Scenario runner for the `l1ofc` controller: academic and cart-pole
//! plants, LQR baseline, gain sweeps, delay-margin search and file output.

pub mod error;
pub mod experiments;
pub mod fixtures;
pub mod output;
pub mod pendulum;
pub mod scenario;
pub mod sim;
pub mod uncertainty;

pub use error::{HarnessError, Result};
pub use experiments::{delay_margin_search, gamma_sweep, DelayMargin, SweepMetrics, SweepRow};
pub use scenario::{Reference, Scenario, ScenarioFile};
pub use sim::{run_closed_loop, Mode, RunOptions, Sample, SimTrace};
pub use uncertainty::UncertaintyKind;

/// Directory holding the shipped scenario files.
pub fn scenario_dir() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios")
}
