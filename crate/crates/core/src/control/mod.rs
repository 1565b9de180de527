//! CRAB pulse parametrization, Landau-Zener cost and the Nelder-Mead pulse
//! search.

mod crab;
mod nelder_mead;
mod optimize;
mod pulse;

pub use crab::{crab_cost, landau_zener_propagate, propagate_block, CrabProblem};
pub use nelder_mead::{nelder_mead, NelderMeadResult, OptimizerConfig, Termination};
pub use optimize::{optimize_pulse, restart_start, OptimizedPulse};
pub use pulse::{ControlPulse, PulseFile};
