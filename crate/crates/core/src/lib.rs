//! Deterministic trace-driven DRAM simulator with read-disturbance
//! mitigations (BlockHammer, PARA, HiRA-MC, Svärd) and the analytic
//! tooling used to configure and cross-check them.
//!
//! All simulated time is integer picoseconds ([`Ps`]).

pub mod blockhammer;
pub mod dram;
pub mod error;
pub mod hira;
pub mod memctrl;
pub mod para;
pub mod sim;
pub mod sketch;
pub mod svard;
pub mod time;
pub mod verify;

pub use error::{Error, Result};
pub use time::Ps;
