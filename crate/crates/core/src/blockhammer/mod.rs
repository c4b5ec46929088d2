//! BlockHammer: blacklist-based activation rate limiting (RowBlocker) and
//! per-thread quotas (AttackThrottler).

mod config;
mod engine;
mod history;
mod throttler;

pub use config::{derive_config, AttackModel, BlockHammerConfig, BlockHammerMode};
pub use engine::BlockHammer;
pub use history::HistoryBuffer;
pub use throttler::Throttler;
