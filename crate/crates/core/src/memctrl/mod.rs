//! Request queues, FR-FCFS command scheduling, refresh issue and the hook
//! surface mitigations plug into.

mod controller;
mod hooks;
mod request;
mod stats;

pub use controller::{Completed, Controller, RefreshMode, RefreshedRows, RowOutcome, TickOutput};
pub use hooks::{ActSafety, Mitigation, NoMitigation};
pub use request::{MemoryRequest, RequestKind, RowPolicy, SchedulerConfig};
pub use stats::ControllerStats;
