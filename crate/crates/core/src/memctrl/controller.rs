use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use super::hooks::{ActSafety, Mitigation};
use super::request::{MemoryRequest, RequestKind, RowPolicy, SchedulerConfig};
use super::stats::ControllerStats;
use crate::dram::{BankId, ClosedRow, CommandKind, Geometry, HiraTimings, IssuedCommand, RankState, TimingParams};
use crate::error::{Error, Result};
use crate::hira::{HiraMc, PlannedRefresh, RefreshKind, RefreshOpKind, RefreshPlan};
use crate::time::{align_up, Ps, COMMAND_SLOT};

/// Where periodic refresh comes from.
#[derive(Debug)]
pub enum RefreshMode {
    /// Rank-level REF every t_refi.
    Baseline,
    /// HiRA-MC generates per-row refreshes and performs them with ACT/HiRA.
    Hira(Box<HiraMc>),
    /// No periodic refresh (unit tests and retention-free studies).
    Disabled,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RowOutcome {
    Hit,
    Miss,
    Conflict,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Completed {
    pub request: MemoryRequest,
    pub bank: BankId,
    pub outcome: RowOutcome,
}

/// Rows `first..end` of `bank` were refreshed at `at`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RefreshedRows {
    pub bank: BankId,
    pub first: u32,
    pub end: u32,
    pub at: Ps,
    pub periodic: bool,
}

/// What happened in one scheduling slot.
#[derive(Debug, Clone, Default)]
pub struct TickOutput {
    pub issued: Option<IssuedCommand>,
    pub closed: Vec<(BankId, ClosedRow)>,
    pub completed: Vec<Completed>,
    pub refreshed: Vec<RefreshedRows>,
    /// Next instant at which calling `tick` can make progress.
    pub wake: Ps,
}

impl TickOutput {
    fn clear(&mut self) {
        self.issued = None;
        self.closed.clear();
        self.completed.clear();
        self.refreshed.clear();
        self.wake = Ps::MAX;
    }
}

#[derive(Debug, Clone, Copy)]
struct Queued {
    req: MemoryRequest,
    bank: BankId,
    conflict_at_admission: bool,
    own_act: bool,
    blocked_since: Option<Ps>,
}

#[derive(Debug, Clone, Copy)]
enum HiraCommit {
    Single(PlannedRefresh),
    Pair(PlannedRefresh, PlannedRefresh),
    Hidden(PlannedRefresh),
}

#[derive(Debug, Clone, Copy)]
struct Choice {
    bank: BankId,
    cmd: CommandKind,
    request: Option<usize>,
    hira: Option<HiraCommit>,
    para_victim: bool,
}

impl Choice {
    fn plain(bank: BankId, cmd: CommandKind) -> Self {
        Choice { bank, cmd, request: None, hira: None, para_victim: false }
    }
}

/// FR-FCFS controller for one channel.
#[derive(Debug)]
pub struct Controller<M: Mitigation> {
    channel: u32,
    geometry: Geometry,
    t: TimingParams,
    h: HiraTimings,
    cfg: SchedulerConfig,
    ranks: Vec<RankState>,
    queue: Vec<Queued>,
    reads: usize,
    writes: usize,
    inflight: BTreeMap<(u32, BankId), u32>,
    completions: BTreeMap<(Ps, u64), Completed>,
    streak: Vec<u32>,
    ref_due: Vec<Ps>,
    refs_issued: Vec<u64>,
    para_queue: Vec<VecDeque<u32>>,
    bus_free: Ps,
    mitigation: M,
    refresh: RefreshMode,
    stats: ControllerStats,
}

impl<M: Mitigation> Controller<M> {
    pub fn new(
        channel: u32,
        geometry: Geometry,
        t: TimingParams,
        h: HiraTimings,
        cfg: SchedulerConfig,
        mitigation: M,
        refresh: RefreshMode,
    ) -> Result<Self> {
        geometry.validate()?;
        t.validate()?;
        cfg.validate()?;
        if channel >= geometry.channels {
            return Err(Error::Config(format!("channel {channel} out of range")));
        }
        let ranks = geometry.ranks_per_channel as usize;
        let banks = ranks * geometry.banks_per_rank as usize;
        Ok(Controller {
            channel,
            geometry,
            t,
            h,
            cfg,
            ranks: (0..ranks).map(|_| RankState::new(geometry.banks_per_rank, t, h)).collect(),
            queue: Vec::new(),
            reads: 0,
            writes: 0,
            inflight: BTreeMap::new(),
            completions: BTreeMap::new(),
            streak: vec![0; banks],
            // Stagger ranks so their REF blackouts do not coincide.
            ref_due: (0..ranks as u64).map(|r| t.t_refi * (r + 1) / ranks as u64).collect(),
            refs_issued: vec![0; ranks],
            para_queue: vec![VecDeque::new(); banks],
            bus_free: 0,
            mitigation,
            refresh,
            stats: ControllerStats::default(),
        })
    }

    pub fn channel(&self) -> u32 {
        self.channel
    }

    pub fn stats(&self) -> &ControllerStats {
        &self.stats
    }

    pub fn mitigation(&self) -> &M {
        &self.mitigation
    }

    pub fn mitigation_mut(&mut self) -> &mut M {
        &mut self.mitigation
    }

    pub fn refresh_mode(&self) -> &RefreshMode {
        &self.refresh
    }

    pub fn ranks(&self) -> &[RankState] {
        &self.ranks
    }

    pub fn queued(&self) -> usize {
        self.queue.len()
    }

    /// Requests accepted but not yet completed.
    pub fn outstanding(&self) -> usize {
        self.queue.len() + self.completions.len()
    }

    pub fn oldest_arrival(&self) -> Option<Ps> {
        self.queue.iter().map(|q| q.req.arrival).min()
    }

    fn local(&self, bank: BankId) -> (usize, u32) {
        let (_, r, b) = self.geometry.split_bank(bank);
        (r as usize, b)
    }

    fn local_index(&self, bank: BankId) -> usize {
        let (r, b) = self.local(bank);
        r * self.geometry.banks_per_rank as usize + b as usize
    }

    fn bank_at(&self, local: usize) -> BankId {
        let bpr = self.geometry.banks_per_rank as usize;
        self.geometry.bank_id(self.channel, (local / bpr) as u32, (local % bpr) as u32)
    }

    fn bank_state(&self, bank: BankId) -> &crate::dram::BankState {
        let (r, b) = self.local(bank);
        self.ranks[r].bank(b)
    }

    /// Offers a request. Returns false when its queue is full or the
    /// mitigation's quota for (thread, bank) is used up; the source retries.
    pub fn enqueue(&mut self, req: MemoryRequest) -> bool {
        debug_assert_eq!(req.addr.channel, self.channel);
        let full = match req.kind {
            RequestKind::Read => self.reads >= self.cfg.read_queue_len,
            RequestKind::Write => self.writes >= self.cfg.write_queue_len,
        };
        if full {
            self.stats.rejected_full += 1;
            return false;
        }
        let bank = req.addr.bank_id(&self.geometry);
        let inflight = self.inflight.get(&(req.thread, bank)).copied().unwrap_or(0);
        if let Some(q) = self.mitigation.quota(req.thread, bank) {
            if inflight >= q {
                self.stats.rejected_quota += 1;
                return false;
            }
        }
        match req.kind {
            RequestKind::Read => self.reads += 1,
            RequestKind::Write => self.writes += 1,
        }
        *self.inflight.entry((req.thread, bank)).or_default() += 1;
        let conflict = matches!(self.bank_state(bank).open, Some(o) if o.access.row != req.addr.row);
        self.queue.push(Queued { req, bank, conflict_at_admission: conflict, own_act: false, blocked_since: None });
        self.stats.admitted += 1;
        true
    }

    /// Runs one command slot at `now`: retires finished requests, advances
    /// time-driven state and issues at most one command.
    pub fn tick(&mut self, now: Ps, out: &mut TickOutput) -> Result<()> {
        out.clear();
        while let Some(entry) = self.completions.first_entry() {
            if entry.key().0 > now {
                break;
            }
            let c = entry.remove();
            let key = (c.request.thread, c.bank);
            if let Some(n) = self.inflight.get_mut(&key) {
                *n -= 1;
                if *n == 0 {
                    self.inflight.remove(&key);
                }
            }
            out.completed.push(c);
        }
        self.mitigation.advance(now)?;
        if let RefreshMode::Hira(h) = &mut self.refresh {
            h.advance(now)?;
        }

        let mut wake = Ps::MAX;
        if let Some((&(t, _), _)) = self.completions.first_key_value() {
            wake = wake.min(t);
        }
        if let Some(t) = self.mitigation.next_event(now) {
            wake = wake.min(t);
        }
        if let RefreshMode::Hira(h) = &self.refresh {
            if let Some(t) = h.next_event(now) {
                wake = wake.min(t);
            }
        }
        if now < self.bus_free {
            out.wake = wake.min(self.bus_free);
            return Ok(());
        }
        if let Some(choice) = self.choose(now, &mut wake)? {
            self.issue(choice, now, out)?;
            wake = wake.min(self.bus_free);
        }
        out.wake = if wake == Ps::MAX { wake } else { align_up(wake.max(now + 1), COMMAND_SLOT) };
        Ok(())
    }

    fn ready(&self, bank: BankId, cmd: &CommandKind, now: Ps, wake: &mut Ps) -> bool {
        let (r, b) = self.local(bank);
        match self.ranks[r].earliest_issue(b, cmd, now) {
            Ok(e) if e <= now => true,
            Ok(e) => {
                *wake = (*wake).min(e);
                false
            }
            Err(_) => false,
        }
    }

    fn choose(&mut self, now: Ps, wake: &mut Ps) -> Result<Option<Choice>> {
        let bpr = self.geometry.banks_per_rank as usize;
        let nbanks = self.streak.len();
        let mut reserved = vec![false; nbanks];

        // Baseline REF: a due rank stops taking demand traffic, closes its
        // banks and refreshes.
        if matches!(self.refresh, RefreshMode::Baseline) {
            // Draining starts early enough that REF goes out exactly on
            // time: the last ACT reaches tRC and every bank gets its PRE slot.
            let lead = self.t.t_rc.max(self.t.t_ras + self.t.t_rp) + (bpr as Ps + 1) * COMMAND_SLOT;
            for r in 0..self.ranks.len() {
                let due = self.ref_due[r];
                if due.saturating_sub(lead) > now {
                    *wake = (*wake).min(due.saturating_sub(lead));
                    continue;
                }
                reserved[r * bpr..(r + 1) * bpr].fill(true);
                let first = self.bank_at(r * bpr);
                if self.ranks[r].all_precharged() {
                    if now < due {
                        *wake = (*wake).min(due);
                    } else if self.ready(first, &CommandKind::Ref, now, wake) {
                        return Ok(Some(Choice::plain(first, CommandKind::Ref)));
                    }
                } else {
                    for lb in r * bpr..(r + 1) * bpr {
                        let bank = self.bank_at(lb);
                        if self.bank_state(bank).open.is_some() && self.ready(bank, &CommandKind::Pre, now, wake) {
                            return Ok(Some(Choice::plain(bank, CommandKind::Pre)));
                        }
                    }
                }
            }
        }

        // Refreshes that cannot wait any longer.
        for lb in 0..nbanks {
            if reserved[lb] {
                continue;
            }
            let bank = self.bank_at(lb);
            let urgent = match &self.refresh {
                RefreshMode::Hira(h) => h.is_urgent(bank, now),
                _ => false,
            };
            if !urgent && self.para_queue[lb].is_empty() {
                continue;
            }
            reserved[lb] = true;
            if self.bank_state(bank).open.is_some() {
                if self.ready(bank, &CommandKind::Pre, now, wake) {
                    return Ok(Some(Choice::plain(bank, CommandKind::Pre)));
                }
                continue;
            }
            if urgent {
                if let Some(c) = self.hidden_refresh_for(bank, now, wake) {
                    return Ok(Some(c));
                }
                let RefreshMode::Hira(h) = &mut self.refresh else { unreachable!() };
                let choice = match h.plan_urgent(bank) {
                    Some(RefreshPlan::Single(a)) => Some(Choice {
                        hira: Some(HiraCommit::Single(a)),
                        ..Choice::plain(bank, CommandKind::Act { row: a.row, refresh: true })
                    }),
                    Some(RefreshPlan::Pair(a, b)) => Some(Choice {
                        hira: Some(HiraCommit::Pair(a, b)),
                        ..Choice::plain(bank, CommandKind::Hira { first: a.row, second: b.row, second_is_access: false })
                    }),
                    None => None,
                };
                if let Some(c) = choice {
                    if self.ready(bank, &c.cmd, now, wake) {
                        return Ok(Some(c));
                    }
                }
            } else {
                let victim = self.para_queue[lb][0];
                let cmd = CommandKind::Act { row: victim, refresh: true };
                if self.ready(bank, &cmd, now, wake) {
                    return Ok(Some(Choice { para_victim: true, ..Choice::plain(bank, cmd) }));
                }
            }
        }

        // Refresh-only rows have nothing to serve; close them promptly.
        for lb in 0..nbanks {
            let bank = self.bank_at(lb);
            if matches!(self.bank_state(bank).open, Some(o) if o.refresh_only)
                && self.ready(bank, &CommandKind::Pre, now, wake)
            {
                return Ok(Some(Choice::plain(bank, CommandKind::Pre)));
            }
        }

        let open_rows: Vec<Option<u32>> =
            (0..nbanks).map(|lb| self.bank_state(self.bank_at(lb)).open_access_row()).collect();
        let mut hits_waiting = vec![false; nbanks];
        let mut conflict_waiting = vec![false; nbanks];
        for q in &self.queue {
            let lb = self.local_index(q.bank);
            match open_rows[lb] {
                Some(r) if r == q.req.addr.row => hits_waiting[lb] = true,
                Some(_) => conflict_waiting[lb] = true,
                None => {}
            }
        }
        let cap = self.cfg.column_cap;

        // Row hits, oldest first, unless the row used up its streak while a
        // conflicting request waits.
        for (qi, q) in self.queue.iter().enumerate() {
            let lb = self.local_index(q.bank);
            if reserved[lb] || open_rows[lb] != Some(q.req.addr.row) {
                continue;
            }
            if self.streak[lb] >= cap && conflict_waiting[lb] {
                continue;
            }
            let (row, col) = (q.req.addr.row, q.req.addr.column);
            let cmd = match q.req.kind {
                RequestKind::Read => CommandKind::Rd { row, col },
                RequestKind::Write => CommandKind::Wr { row, col },
            };
            if self.ready(q.bank, &cmd, now, wake) {
                return Ok(Some(Choice { request: Some(qi), ..Choice::plain(q.bank, cmd) }));
            }
        }

        // Row misses and conflicts, oldest first.
        let mut any_unsafe = false;
        for qi in 0..self.queue.len() {
            let q = self.queue[qi];
            let lb = self.local_index(q.bank);
            if reserved[lb] {
                continue;
            }
            match self.bank_state(q.bank).open {
                Some(o) if o.refresh_only => continue,
                Some(_) if open_rows[lb] == Some(q.req.addr.row) => continue,
                Some(_) => {
                    if (!hits_waiting[lb] || self.streak[lb] >= cap)
                        && self.ready(q.bank, &CommandKind::Pre, now, wake)
                    {
                        return Ok(Some(Choice::plain(q.bank, CommandKind::Pre)));
                    }
                    continue;
                }
                None => {}
            }
            let row = q.req.addr.row;
            if let ActSafety::Unsafe { retry_after } = self.mitigation.is_act_safe(q.bank, row, now) {
                any_unsafe = true;
                if q.blocked_since.is_none() {
                    self.queue[qi].blocked_since = Some(now);
                    self.stats.blocked_requests += 1;
                }
                *wake = (*wake).min(retry_after.max(now + 1));
                continue;
            }
            if let Some(c) = self.hidden_refresh_with(q.bank, qi, now, wake) {
                return Ok(Some(c));
            }
            let cmd = CommandKind::Act { row, refresh: false };
            if self.ready(q.bank, &cmd, now, wake) {
                return Ok(Some(Choice { request: Some(qi), ..Choice::plain(q.bank, cmd) }));
            }
        }
        if any_unsafe {
            self.stats.unsafe_checks += 1;
        }

        if self.cfg.row_policy == RowPolicy::Closed {
            for lb in 0..nbanks {
                let bank = self.bank_at(lb);
                if open_rows[lb].is_some() && !hits_waiting[lb] && self.ready(bank, &CommandKind::Pre, now, wake) {
                    return Ok(Some(Choice::plain(bank, CommandKind::Pre)));
                }
            }
        }
        Ok(None)
    }

    /// Case 1 for an urgent bank: hide a refresh behind the oldest safe
    /// demand request that pairs with it.
    fn hidden_refresh_for(&mut self, bank: BankId, now: Ps, wake: &mut Ps) -> Option<Choice> {
        for qi in 0..self.queue.len() {
            let q = self.queue[qi];
            if q.bank != bank || self.mitigation.is_act_safe(bank, q.req.addr.row, now) != ActSafety::Safe {
                continue;
            }
            if let Some(c) = self.hidden_refresh_with(bank, qi, now, wake) {
                return Some(c);
            }
        }
        None
    }

    fn hidden_refresh_with(&mut self, bank: BankId, qi: usize, now: Ps, wake: &mut Ps) -> Option<Choice> {
        let RefreshMode::Hira(h) = &mut self.refresh else { return None };
        if !h.has_pending(bank) {
            return None;
        }
        let row = self.queue[qi].req.addr.row;
        let p = h.find_concurrent(bank, row)?;
        let cmd = CommandKind::Hira { first: p.row, second: row, second_is_access: true };
        self.ready(bank, &cmd, now, wake).then_some(Choice {
            request: Some(qi),
            hira: Some(HiraCommit::Hidden(p)),
            ..Choice::plain(bank, cmd)
        })
    }

    fn refresh_kind(&self, bank: BankId, id: u64) -> RefreshKind {
        match &self.refresh {
            RefreshMode::Hira(h) => h
                .pending(bank)
                .iter()
                .find(|e| e.id == id)
                .map_or(RefreshKind::Periodic, |e| e.kind()),
            _ => RefreshKind::Preventive,
        }
    }

    fn commit_refresh(&mut self, bank: BankId, p: PlannedRefresh, at: Ps, out: &mut TickOutput) -> Result<()> {
        let kind = self.refresh_kind(bank, p.id);
        let RefreshMode::Hira(h) = &mut self.refresh else {
            return Err(Error::Invariant("HiRA refresh without HiRA-MC".into()));
        };
        h.commit(bank, p, at)?;
        if kind == RefreshKind::Preventive {
            self.stats.preventive_refreshes += 1;
        }
        out.refreshed.push(RefreshedRows {
            bank,
            first: p.row,
            end: p.row + 1,
            at,
            periodic: kind == RefreshKind::Periodic,
        });
        Ok(())
    }

    fn record_refresh_op(&mut self, kind: RefreshOpKind) {
        *self.stats.refresh_ops.entry(kind).or_default() += 1;
        self.stats.refresh_busy_ps += kind.bank_busy(&self.t, &self.h);
        if let RefreshMode::Hira(h) = &mut self.refresh {
            h.record_op(kind);
        }
    }

    fn issue(&mut self, c: Choice, now: Ps, out: &mut TickOutput) -> Result<()> {
        let (r, b) = self.local(c.bank);
        let lb = self.local_index(c.bank);
        let closed = self.ranks[r].apply(b, &c.cmd, now)?;
        out.issued = Some(IssuedCommand { at: now, bank: c.bank, kind: c.cmd });
        self.bus_free = now + COMMAND_SLOT;

        match c.cmd {
            CommandKind::Act { row, refresh: false } => {
                self.stats.act += 1;
                self.streak[lb] = 0;
                let qi = c.request.expect("demand ACT has a request");
                self.demand_act(qi, now)?;
                debug_assert_eq!(self.queue[qi].req.addr.row, row);
            }
            CommandKind::Act { row, refresh: true } => {
                self.stats.act += 1;
                self.stats.refresh_acts += 1;
                self.record_refresh_op(RefreshOpKind::Plain);
                if c.para_victim {
                    let v = self.para_queue[lb].pop_front();
                    debug_assert_eq!(v, Some(row));
                    self.stats.preventive_refreshes += 1;
                    out.refreshed.push(RefreshedRows { bank: c.bank, first: row, end: row + 1, at: now, periodic: false });
                } else if let Some(HiraCommit::Single(p)) = c.hira {
                    self.commit_refresh(c.bank, p, now, out)?;
                }
            }
            CommandKind::Hira { .. } => {
                self.stats.hira += 1;
                // The sequence's PRE and second ACT own the bus until the
                // second ACT has gone out.
                self.bus_free = align_up(now + self.h.second_act_offset(), COMMAND_SLOT) + COMMAND_SLOT;
                self.streak[lb] = 0;
                match c.hira {
                    Some(HiraCommit::Hidden(p)) => {
                        self.record_refresh_op(RefreshOpKind::RefreshAccess);
                        self.commit_refresh(c.bank, p, now, out)?;
                        let qi = c.request.expect("hidden refresh rides on a request");
                        self.demand_act(qi, now + self.h.second_act_offset())?;
                    }
                    Some(HiraCommit::Pair(a, p2)) => {
                        self.record_refresh_op(RefreshOpKind::RefreshRefresh);
                        self.commit_refresh(c.bank, a, now, out)?;
                        self.commit_refresh(c.bank, p2, now + self.h.second_act_offset(), out)?;
                    }
                    _ => return Err(Error::Invariant("HiRA issued without a refresh plan".into())),
                }
            }
            CommandKind::Pre => {
                self.stats.pre += 1;
                self.streak[lb] = 0;
                for row in closed {
                    if row.restore_time() < self.t.t_ras {
                        self.stats.hira_restore_violations += 1;
                    }
                    out.closed.push((c.bank, row));
                    if row.refresh {
                        continue;
                    }
                    match &mut self.refresh {
                        RefreshMode::Hira(h) => h.on_demand_close(c.bank, row.row, now)?,
                        _ => {
                            if let Some(v) = self.mitigation.on_close(c.bank, row.row, now) {
                                self.para_queue[lb].push_back(v);
                            }
                        }
                    }
                }
            }
            CommandKind::Rd { .. } | CommandKind::Wr { .. } => {
                let qi = c.request.expect("column command has a request");
                let q = self.queue.remove(qi);
                self.streak[lb] += 1;
                let outcome = match (q.own_act, q.conflict_at_admission) {
                    (false, _) => RowOutcome::Hit,
                    (true, false) => RowOutcome::Miss,
                    (true, true) => RowOutcome::Conflict,
                };
                match outcome {
                    RowOutcome::Hit => self.stats.row_hits += 1,
                    RowOutcome::Miss => self.stats.row_misses += 1,
                    RowOutcome::Conflict => self.stats.row_conflicts += 1,
                }
                let done = match q.req.kind {
                    RequestKind::Read => {
                        self.reads -= 1;
                        self.stats.rd += 1;
                        self.stats.reads_served += 1;
                        now + self.t.t_cl
                    }
                    RequestKind::Write => {
                        self.writes -= 1;
                        self.stats.wr += 1;
                        self.stats.writes_served += 1;
                        now
                    }
                };
                let mut request = q.req;
                request.completion = Some(done);
                self.completions.insert((done, request.id), Completed { request, bank: q.bank, outcome });
            }
            CommandKind::Ref => {
                self.stats.refs += 1;
                let per_window = self.t.refs_per_window().max(1);
                let rows = self.geometry.rows_per_bank;
                let per_ref = (rows as u64).div_ceil(per_window) as u32;
                let idx = (self.refs_issued[r] % per_window) as u32;
                let first = (idx * per_ref).min(rows);
                let end = (first + per_ref).min(rows);
                self.refs_issued[r] += 1;
                self.ref_due[r] += self.t.t_refi;
                let bpr = self.geometry.banks_per_rank;
                self.stats.refresh_busy_ps += self.t.t_rfc * bpr as Ps;
                for bb in 0..bpr {
                    let bank = self.geometry.bank_id(self.channel, r as u32, bb);
                    out.refreshed.push(RefreshedRows { bank, first, end, at: now, periodic: true });
                }
            }
        }
        Ok(())
    }

    fn demand_act(&mut self, qi: usize, at: Ps) -> Result<()> {
        let q = &mut self.queue[qi];
        q.own_act = true;
        if let Some(since) = q.blocked_since.take() {
            let d = at - since;
            self.stats.max_block_delay_ps = self.stats.max_block_delay_ps.max(d);
            self.stats.total_block_delay_ps += d;
            let bucket = 64 - (d / 1_000).leading_zeros();
            *self.stats.block_delay_hist.entry(bucket).or_default() += 1;
        }
        let (bank, row, thread) = (q.bank, q.req.addr.row, q.req.thread);
        self.mitigation.on_act(bank, row, Some(thread), at)
    }
}
