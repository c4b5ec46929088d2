//! PARA: probabilistic neighbour refresh, and the analysis that picks its
//! probability threshold for a target failure rate.

mod analysis;
mod runtime;

pub use analysis::{k_factor, ln_p_rh, p_failed, p_rh, solve_pth, ParaSolverInput, DEFAULT_TARGET_PRH};
pub use runtime::{ParaConfig, ParaRuntime, neighbour_pick};
