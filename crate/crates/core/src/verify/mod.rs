//! Safety checking: the epoch feasibility analysis, an exact sliding-window
//! activation oracle, refresh coverage and adversarial pattern search.

mod adversarial;
mod coverage;
mod epoch;
mod oracle;

pub use adversarial::{
    adversarial_search, attack_for, scaled_block_hammer, scaled_block_hammer_config, scaled_sim_config, scaled_timing,
    AdversarialReport, PatternFamily, PatternResult, SCALED_N_RH, SCALED_T_REFW,
};
pub use coverage::{CoverageReport, CoverageRule, RefreshCoverage};
pub use epoch::{feasibility_brute_force, feasibility_check, EpochModel, EpochType, Feasibility, EPOCH_TYPES};
pub use oracle::{naive_window_max, WindowOracle};
