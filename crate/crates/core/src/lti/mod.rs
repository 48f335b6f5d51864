//! LTI system algebra: realizations, interconnection, induced L1 norms,
//! structural tests and fixed-step simulation.

mod norm;
mod sim;
mod system;
mod tf;
mod zeros;

pub use norm::l1_norm;
pub use sim::{rk4_step, simulate_lti, SignalTrace};
pub use system::{feedback_unity_gain, parallel, series, FreqResponse, StateSpace};
pub use tf::{Poly, TransferFunction};
pub use zeros::{is_controllable, is_observable, rosenbrock_rank_gap, transmission_zeros};
