use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::op::RefreshOpKind;
use super::refptr::RefPtrTable;
use super::spt::SubarrayPairsTable;
use crate::dram::{BankId, Geometry, HiraTimings, TimingParams};
use crate::error::{Error, Result};
use crate::para::ParaRuntime;
use crate::svard::SvardPara;
use crate::time::{Ps, COMMAND_SLOT};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RefreshKind {
    Periodic,
    Preventive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Target {
    /// Resolved through the RefPtr table when performed.
    Deferred { window: u64 },
    Row(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefreshRequest {
    pub id: u64,
    pub bank: BankId,
    pub generated: Ps,
    pub deadline: Ps,
    target: Target,
    /// Pushed out of a full PR-FIFO; performed as soon as possible.
    pub forced: bool,
}

impl RefreshRequest {
    pub fn kind(&self) -> RefreshKind {
        match self.target {
            Target::Deferred { .. } => RefreshKind::Periodic,
            Target::Row(_) => RefreshKind::Preventive,
        }
    }
}

/// Source of preventive refreshes fed by demand-row closures.
#[derive(Debug, Clone)]
pub enum Preventive {
    Para(ParaRuntime),
    Svard(Box<SvardPara>),
}

impl Preventive {
    fn on_close(&mut self, bank: BankId, row: u32) -> Option<u32> {
        match self {
            Preventive::Para(p) => p.on_close(row),
            Preventive::Svard(s) => s.on_close(bank, row),
        }
    }

    pub fn preventive_count(&self) -> u64 {
        match self {
            Preventive::Para(p) => p.preventive_count(),
            Preventive::Svard(s) => s.preventive_count(),
        }
    }
}

/// A refresh chosen for one bank, with rows resolved.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannedRefresh {
    pub id: u64,
    pub row: u32,
    subarray: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefreshPlan {
    Single(PlannedRefresh),
    Pair(PlannedRefresh, PlannedRefresh),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct HiraStats {
    pub periodic_generated: u64,
    pub preventive_generated: u64,
    pub performed: u64,
    pub deadline_violations: u64,
    pub max_lateness_ps: Ps,
    pub ops: std::collections::BTreeMap<RefreshOpKind, u64>,
    pub forced: u64,
    pub pr_fifo_peak: usize,
    pub table_peak: usize,
}

/// Refresh bookkeeping of one channel under HiRA-MC: periodic generation,
/// the deadline-ordered Refresh Table, PR-FIFOs and RefPtr tables.
#[derive(Debug, Clone)]
pub struct HiraMc {
    geometry: Geometry,
    t: TimingParams,
    h: HiraTimings,
    slack: Ps,
    period: Ps,
    banks: Vec<BankId>,
    next_gen: Vec<(Ps, u64, u32)>,
    table: Vec<Vec<RefreshRequest>>,
    rank_entries: Vec<usize>,
    table_capacity: usize,
    fifo: Vec<VecDeque<u64>>,
    fifo_capacity: usize,
    refptr: RefPtrTable,
    spt: SubarrayPairsTable,
    para: Option<Preventive>,
    urgent_lead: Ps,
    next_id: u64,
    stats: HiraStats,
}

impl HiraMc {
    pub fn new(
        geometry: Geometry,
        channel: u32,
        t: TimingParams,
        h: HiraTimings,
        slack_rc_multiples: u32,
        spt: SubarrayPairsTable,
        para: Option<Preventive>,
    ) -> Result<Self> {
        h.validate(&t)?;
        if spt.subarrays() != geometry.subarrays_per_bank {
            return Err(Error::Config(format!(
                "SPT covers {} subarrays, geometry has {}",
                spt.subarrays(),
                geometry.subarrays_per_bank
            )));
        }
        let slack = slack_rc_multiples as Ps * t.t_rc;
        if slack >= t.t_refw {
            return Err(Error::Config("refresh slack exceeds t_refw".into()));
        }
        // Every window's requests must have deadlines inside the window.
        let period = (t.t_refw - slack) / geometry.rows_per_bank as Ps;
        if period == 0 {
            return Err(Error::Config("refresh window too short for the row count".into()));
        }
        let stagger = period / geometry.banks_per_rank as Ps;
        let banks: Vec<BankId> = (0..geometry.ranks_per_channel)
            .flat_map(|r| (0..geometry.banks_per_rank).map(move |b| geometry.bank_id(channel, r, b)))
            .collect();
        let next_gen = (0..geometry.total_banks())
            .map(|b| ((b % geometry.banks_per_rank) as Ps * stagger, 0, 0))
            .collect();
        let per_bank = slack.div_ceil(t.t_rc).max(1) as usize;
        Ok(HiraMc {
            geometry,
            t,
            h,
            slack,
            period,
            banks,
            next_gen,
            table: vec![Vec::new(); geometry.total_banks() as usize],
            rank_entries: vec![0; geometry.total_ranks() as usize],
            table_capacity: per_bank * (1 + geometry.banks_per_rank as usize),
            fifo: vec![VecDeque::new(); geometry.total_banks() as usize],
            fifo_capacity: per_bank,
            refptr: RefPtrTable::new(
                geometry.total_banks(),
                geometry.subarrays_per_bank,
                geometry.rows_per_subarray(),
            ),
            spt,
            para,
            // Worst case from "urgent" to the refresh ACT: a just-opened row
            // must reach tRAS and precharge (one tRC), a tFAW window may be
            // full, and a few bus slots may be taken.
            urgent_lead: t.t_rc + t.t_faw + 2 * COMMAND_SLOT,
            next_id: 0,
            stats: HiraStats::default(),
        })
    }

    pub fn period(&self) -> Ps {
        self.period
    }

    pub fn stagger(&self) -> Ps {
        self.period / self.geometry.banks_per_rank as Ps
    }

    pub fn slack(&self) -> Ps {
        self.slack
    }

    pub fn table_capacity(&self) -> usize {
        self.table_capacity
    }

    pub fn fifo_capacity(&self) -> usize {
        self.fifo_capacity
    }

    pub fn stats(&self) -> &HiraStats {
        &self.stats
    }

    pub fn spt(&self) -> &SubarrayPairsTable {
        &self.spt
    }

    pub fn timings(&self) -> &HiraTimings {
        &self.h
    }

    pub fn preventive(&self) -> Option<&Preventive> {
        self.para.as_ref()
    }

    pub fn pending(&self, bank: BankId) -> &[RefreshRequest] {
        &self.table[bank.0 as usize]
    }

    pub fn fifo_len(&self, bank: BankId) -> usize {
        self.fifo[bank.0 as usize].len()
    }

    fn insert(&mut self, req: RefreshRequest) -> Result<()> {
        let rank = self.geometry.rank_of(req.bank).0 as usize;
        if self.rank_entries[rank] >= self.table_capacity {
            return Err(Error::Invariant(format!(
                "Refresh Table of rank {rank} full ({} entries) at {} ps",
                self.table_capacity, req.generated
            )));
        }
        self.rank_entries[rank] += 1;
        self.stats.table_peak = self.stats.table_peak.max(self.rank_entries[rank]);
        let q = &mut self.table[req.bank.0 as usize];
        let pos = q.partition_point(|e| (e.deadline, e.id) <= (req.deadline, req.id));
        q.insert(pos, req);
        Ok(())
    }

    /// Generates every periodic request due at or before `now`.
    pub fn advance(&mut self, now: Ps) -> Result<()> {
        let rows = self.geometry.rows_per_bank;
        for i in 0..self.banks.len() {
            let bank = self.banks[i];
            loop {
                let (at, window, idx) = self.next_gen[bank.0 as usize];
                if at > now {
                    break;
                }
                let id = self.next_id;
                self.next_id += 1;
                self.insert(RefreshRequest {
                    id,
                    bank,
                    generated: at,
                    deadline: at + self.slack,
                    target: Target::Deferred { window },
                    forced: false,
                })?;
                self.stats.periodic_generated += 1;
                let offset = (bank.0 % self.geometry.banks_per_rank) as Ps * self.stagger();
                self.next_gen[bank.0 as usize] = if idx + 1 < rows {
                    (at + self.period, window, idx + 1)
                } else {
                    ((window + 1) * self.t.t_refw + offset, window + 1, 0)
                };
            }
        }
        Ok(())
    }

    /// Earliest future instant at which generation or urgency changes.
    pub fn next_event(&self, now: Ps) -> Option<Ps> {
        let gens = self.banks.iter().map(|b| self.next_gen[b.0 as usize].0);
        let urg = self.banks.iter().filter_map(|&b| self.urgent_from(b));
        gens.chain(urg).filter(|&x| x > now).min()
    }

    /// When the bank turns urgent: the j-th pending entry (by deadline)
    /// leaves room for itself and the j entries ahead of it.
    fn urgent_from(&self, bank: BankId) -> Option<Ps> {
        let q = &self.table[bank.0 as usize];
        if q.iter().any(|e| e.forced) {
            return Some(0);
        }
        q.iter()
            .enumerate()
            .map(|(j, e)| e.deadline.saturating_sub(self.urgent_lead + j as Ps * self.t.t_rc))
            .min()
    }

    pub fn is_urgent(&self, bank: BankId, now: Ps) -> bool {
        self.urgent_from(bank).is_some_and(|u| u <= now)
    }

    pub fn has_pending(&self, bank: BankId) -> bool {
        !self.table[bank.0 as usize].is_empty()
    }

    fn is_fifo_head(&self, e: &RefreshRequest) -> bool {
        e.forced || self.fifo[e.bank.0 as usize].front() == Some(&e.id)
    }

    /// Case 1: a refresh that can hide behind activating `access_row`.
    /// Entries are tried in deadline order.
    pub fn find_concurrent(&mut self, bank: BankId, access_row: u32) -> Option<PlannedRefresh> {
        let access_sub = self.geometry.subarray_of(access_row);
        let q = self.table[bank.0 as usize].clone();
        let mut order: Vec<&RefreshRequest> = q.iter().collect();
        order.sort_by_key(|e| (!e.forced, e.deadline, e.id));
        for e in order {
            match e.target {
                Target::Deferred { window } => {
                    if let Some(s) = self.refptr.pick(bank.0, window, &self.spt, Some(access_sub)) {
                        return Some(PlannedRefresh { id: e.id, row: self.refptr.peek(bank.0, s), subarray: s });
                    }
                }
                Target::Row(row) => {
                    let s = self.geometry.subarray_of(row);
                    if self.is_fifo_head(e) && self.spt.can_pair(s, access_sub) && row != access_row {
                        return Some(PlannedRefresh { id: e.id, row, subarray: s });
                    }
                }
            }
        }
        None
    }

    /// Case 2: what to do for an urgent bank once it is precharged. Pairs
    /// the most pressing entry with a second one when the SPT allows.
    pub fn plan_urgent(&mut self, bank: BankId) -> Option<RefreshPlan> {
        let q = self.table[bank.0 as usize].clone();
        let mut order: Vec<&RefreshRequest> = q.iter().collect();
        order.sort_by_key(|e| (!e.forced, e.deadline, e.id));
        let first = order.iter().copied().find(|e| e.kind() == RefreshKind::Periodic || self.is_fifo_head(e))?;
        let a = match first.target {
            Target::Deferred { window } => {
                let s = self.refptr.pick(bank.0, window, &self.spt, None)?;
                PlannedRefresh { id: first.id, row: self.refptr.peek(bank.0, s), subarray: s }
            }
            Target::Row(row) => PlannedRefresh { id: first.id, row, subarray: self.geometry.subarray_of(row) },
        };
        let fifo = &self.fifo[bank.0 as usize];
        for e in order.iter().filter(|e| e.id != a.id) {
            match e.target {
                Target::Deferred { window } => {
                    if let Some(s) = self.refptr.pick(bank.0, window, &self.spt, Some(a.subarray)) {
                        let b = PlannedRefresh { id: e.id, row: self.refptr.peek(bank.0, s), subarray: s };
                        return Some(RefreshPlan::Pair(a, b));
                    }
                }
                Target::Row(row) => {
                    // Preventive entries leave the FIFO in order.
                    let head_ok = e.forced
                        || fifo.front() == Some(&e.id)
                        || (fifo.front() == Some(&a.id) && fifo.get(1) == Some(&e.id));
                    let s = self.geometry.subarray_of(row);
                    if head_ok && self.spt.can_pair(a.subarray, s) {
                        return Some(RefreshPlan::Pair(a, PlannedRefresh { id: e.id, row, subarray: s }));
                    }
                }
            }
        }
        Some(RefreshPlan::Single(a))
    }

    /// Records that refresh `p` started at `at`: removes its entry, advances
    /// the RefPtr and checks the deadline.
    pub fn commit(&mut self, bank: BankId, p: PlannedRefresh, at: Ps) -> Result<()> {
        let q = &mut self.table[bank.0 as usize];
        let pos = q
            .iter()
            .position(|e| e.id == p.id)
            .ok_or_else(|| Error::Invariant(format!("refresh {} not queued", p.id)))?;
        let e = q.remove(pos);
        self.rank_entries[self.geometry.rank_of(bank).0 as usize] -= 1;
        match e.target {
            Target::Deferred { window } => {
                let row = self.refptr.take(bank.0, window, p.subarray);
                debug_assert_eq!(row, p.row);
            }
            Target::Row(_) => {
                let f = &mut self.fifo[bank.0 as usize];
                if let Some(i) = f.iter().position(|&id| id == e.id) {
                    f.remove(i);
                }
            }
        }
        self.stats.performed += 1;
        if at > e.deadline {
            self.stats.deadline_violations += 1;
            self.stats.max_lateness_ps = self.stats.max_lateness_ps.max(at - e.deadline);
        }
        Ok(())
    }

    pub fn record_op(&mut self, kind: RefreshOpKind) {
        *self.stats.ops.entry(kind).or_default() += 1;
    }

    /// Queues a preventive refresh of `row`. A full PR-FIFO hands its oldest
    /// entry to the forced path first.
    pub fn preventive_enqueue(&mut self, bank: BankId, row: u32, now: Ps) -> Result<()> {
        let b = bank.0 as usize;
        if self.fifo[b].len() >= self.fifo_capacity {
            let oldest = self.fifo[b].pop_front().expect("full FIFO");
            if let Some(e) = self.table[b].iter_mut().find(|e| e.id == oldest) {
                e.forced = true;
            }
            self.stats.forced += 1;
        }
        let id = self.next_id;
        self.next_id += 1;
        self.insert(RefreshRequest {
            id,
            bank,
            generated: now,
            deadline: now + self.slack,
            target: Target::Row(row),
            forced: false,
        })?;
        self.fifo[b].push_back(id);
        self.stats.pr_fifo_peak = self.stats.pr_fifo_peak.max(self.fifo[b].len());
        self.stats.preventive_generated += 1;
        Ok(())
    }

    /// Feeds a demand-row closure to the embedded PARA engine.
    pub fn on_demand_close(&mut self, bank: BankId, row: u32, now: Ps) -> Result<()> {
        if let Some(victim) = self.para.as_mut().and_then(|p| p.on_close(bank, row)) {
            self.preventive_enqueue(bank, victim, now)?;
        }
        Ok(())
    }

    /// Entries whose deadline already passed without being performed.
    pub fn overdue(&self, now: Ps) -> usize {
        self.table.iter().flatten().filter(|e| e.deadline < now).count()
    }

    pub fn timing(&self) -> &TimingParams {
        &self.t
    }
}
