//! Whole-system simulation: configuration, workloads, the event loop and
//! its reports.

mod config;
mod engine;
mod report;
pub mod seed;
mod sweep;
mod trace;
mod workload;

pub use config::{
    BlockHammerParams, DramConfig, HiraParams, MitigationConfig, OutputConfig, ParaParams, PreventiveConfig,
    ProfileSource, RunConfig, SimConfig, SvardParams, WorkloadConfig,
};
pub use engine::{block_hammer_config, load_profile, run, AnyMitigation, RunOutput, Simulation};
pub use report::{write_commands, RhliEntry, StatsReport, ThreadReport, VerifyReport};
pub use sweep::{run_sweep, SweepConfig, SweepResult, SweepVariant};
pub use trace::{parse_trace, write_trace, TraceReader, TraceRecord};
pub use workload::{gen_attack, AttackPattern, AttackSpec, GeneratorSpec, RandomSpec, StreamSpec};
