use serde::{Deserialize, Serialize};

use super::spt::SubarrayPairsTable;
use crate::dram::{BankState, Geometry, HiraTimings, TimingParams};
use crate::error::{Error, Result};
use crate::time::Ps;

/// The three ways HiRA-MC performs a refresh.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefreshOpKind {
    /// ACT + PRE on one row.
    Plain,
    /// Two refreshes in one HiRA sequence.
    RefreshRefresh,
    /// A refresh hidden behind a demand activation.
    RefreshAccess,
}

impl RefreshOpKind {
    /// Time the bank is unavailable to demand traffic because of the
    /// refresh. A hidden refresh only costs the t1 + t2 it adds before the
    /// access row opens.
    pub fn bank_busy(self, t: &TimingParams, h: &HiraTimings) -> Ps {
        match self {
            RefreshOpKind::Plain => t.t_ras + t.t_rp,
            RefreshOpKind::RefreshRefresh => h.t1 + h.t2 + t.t_ras + t.t_rp,
            RefreshOpKind::RefreshAccess => h.t1 + h.t2,
        }
    }

    pub fn rows(self) -> u32 {
        match self {
            RefreshOpKind::RefreshRefresh => 2,
            _ => 1,
        }
    }
}

/// Command times and derived latencies of one HiRA sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HiraSchedule {
    pub first_act: Ps,
    pub pre: Ps,
    pub second_act: Ps,
    /// When the access row can serve a column command.
    pub data_ready: Option<Ps>,
    /// Earliest closing PRE; it closes both rows.
    pub earliest_close: Ps,
    pub restore_first: Ps,
    pub restore_second: Ps,
    /// First ACT to the moment both rows are fully restored.
    pub two_row_latency: Ps,
}

/// ACT + PRE + ACT with tRAS each: the non-HiRA way to refresh two rows.
pub fn conventional_two_row_latency(t: &TimingParams) -> Ps {
    t.t_ras + t.t_rp + t.t_ras
}

/// Plans a HiRA sequence opening `refresh_row` then `second_row` in bank
/// `state` starting at `now`.
#[allow(clippy::too_many_arguments)]
pub fn hira_issue(
    spt: &SubarrayPairsTable,
    geometry: &Geometry,
    t: &TimingParams,
    h: &HiraTimings,
    state: &BankState,
    refresh_row: u32,
    second_row: u32,
    second_is_access: bool,
    now: Ps,
) -> Result<HiraSchedule> {
    if state.open.is_some() {
        return Err(Error::Protocol("HiRA needs a precharged bank".into()));
    }
    let (sa, sb) = (geometry.subarray_of(refresh_row), geometry.subarray_of(second_row));
    if !spt.can_pair(sa, sb) {
        return Err(Error::Pairing(format!(
            "subarrays {sa} and {sb} share sense amplifiers"
        )));
    }
    let second_act = now + h.t1 + h.t2;
    let earliest_close = second_act + t.t_ras;
    Ok(HiraSchedule {
        first_act: now,
        pre: now + h.t1,
        second_act,
        data_ready: second_is_access.then_some(second_act + t.t_rcd),
        earliest_close,
        restore_first: earliest_close - now,
        restore_second: earliest_close - second_act,
        two_row_latency: earliest_close - now,
    })
}
