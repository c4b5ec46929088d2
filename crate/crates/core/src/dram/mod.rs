//! DRAM organization, address decoding, per-bank state and timing checks.

mod address;
mod bank;
mod geometry;
mod timing;
mod validate;

pub use address::{AddressMapping, DecodedAddress, MappingField, MappingPreset, WORD_BYTES};
pub use bank::{BankState, ClosedRow, CommandKind, OpenBank, OpenRow, Phase, RankState};
pub use geometry::{BankId, Geometry, RankId};
pub use timing::{HiraTimings, TimingParams};
pub use validate::{IssuedCommand, ReplayValidator};
