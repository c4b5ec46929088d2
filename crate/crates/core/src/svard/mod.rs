//! Per-row vulnerability profiles and the PARA wrapper that picks each
//! closure's refresh probability from them.

mod profile;
mod svard_para;

pub use profile::{BinSpec, ProfileSpec, VulnerabilityProfile, MAX_BINS};
pub use svard_para::{LookupScope, SvardConfig, SvardPara};
