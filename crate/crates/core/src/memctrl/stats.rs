use std::collections::BTreeMap;

use serde::Serialize;

use crate::hira::RefreshOpKind;
use crate::time::Ps;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ControllerStats {
    pub admitted: u64,
    pub rejected_full: u64,
    pub rejected_quota: u64,
    pub reads_served: u64,
    pub writes_served: u64,
    pub row_hits: u64,
    pub row_misses: u64,
    pub row_conflicts: u64,
    pub act: u64,
    pub pre: u64,
    pub rd: u64,
    pub wr: u64,
    pub refs: u64,
    pub hira: u64,
    pub refresh_acts: u64,
    pub preventive_refreshes: u64,
    /// Requests whose ACT the mitigation held back at least once.
    pub blocked_requests: u64,
    /// Slots in which some ACT candidate was reported unsafe.
    pub unsafe_checks: u64,
    pub max_block_delay_ps: Ps,
    pub total_block_delay_ps: Ps,
    /// Blocked ACTs by delay, bucket b holding delays below 2^b ns.
    pub block_delay_hist: BTreeMap<u32, u64>,
    pub refresh_busy_ps: Ps,
    pub refresh_ops: BTreeMap<RefreshOpKind, u64>,
    pub hira_restore_violations: u64,
}

impl ControllerStats {
    pub fn merge(&mut self, o: &ControllerStats) {
        self.admitted += o.admitted;
        self.rejected_full += o.rejected_full;
        self.rejected_quota += o.rejected_quota;
        self.reads_served += o.reads_served;
        self.writes_served += o.writes_served;
        self.row_hits += o.row_hits;
        self.row_misses += o.row_misses;
        self.row_conflicts += o.row_conflicts;
        self.act += o.act;
        self.pre += o.pre;
        self.rd += o.rd;
        self.wr += o.wr;
        self.refs += o.refs;
        self.hira += o.hira;
        self.refresh_acts += o.refresh_acts;
        self.preventive_refreshes += o.preventive_refreshes;
        self.blocked_requests += o.blocked_requests;
        self.unsafe_checks += o.unsafe_checks;
        self.max_block_delay_ps = self.max_block_delay_ps.max(o.max_block_delay_ps);
        self.total_block_delay_ps += o.total_block_delay_ps;
        for (k, v) in &o.block_delay_hist {
            *self.block_delay_hist.entry(*k).or_default() += v;
        }
        self.refresh_busy_ps += o.refresh_busy_ps;
        for (k, v) in &o.refresh_ops {
            *self.refresh_ops.entry(*k).or_default() += v;
        }
        self.hira_restore_violations += o.hira_restore_violations;
    }

    pub fn column_accesses(&self) -> u64 {
        self.rd + self.wr
    }
}
