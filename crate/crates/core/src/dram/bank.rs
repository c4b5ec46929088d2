use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::timing::{HiraTimings, TimingParams};
use crate::error::{Error, Result};
use crate::time::Ps;

/// A command addressed to one bank (REF addresses the whole rank).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "cmd", rename_all = "snake_case")]
pub enum CommandKind {
    /// `refresh` marks an activation that only restores charge; such a row
    /// cannot serve column commands.
    Act { row: u32, refresh: bool },
    Pre,
    Rd { row: u32, col: u32 },
    Wr { row: u32, col: u32 },
    Ref,
    /// ACT(first) at t, PRE at t+t1, ACT(second) at t+t1+t2. `first` is
    /// always a refresh; `second` is either an access or another refresh.
    Hira { first: u32, second: u32, second_is_access: bool },
}

impl CommandKind {
    pub fn name(&self) -> &'static str {
        match self {
            CommandKind::Act { .. } => "ACT",
            CommandKind::Pre => "PRE",
            CommandKind::Rd { .. } => "RD",
            CommandKind::Wr { .. } => "WR",
            CommandKind::Ref => "REF",
            CommandKind::Hira { .. } => "HIRA",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenRow {
    pub row: u32,
    pub act_time: Ps,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OpenBank {
    /// The row whose sense amplifiers drive the bank I/O (or the second
    /// refresh row of a refresh-refresh HiRA).
    pub access: OpenRow,
    /// The row opened first by a HiRA sequence, restoring in the background.
    pub hidden: Option<OpenRow>,
    pub refresh_only: bool,
}

/// One row that a PRE closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedRow {
    pub row: u32,
    pub opened_at: Ps,
    pub closed_at: Ps,
    pub refresh: bool,
}

impl ClosedRow {
    pub fn restore_time(&self) -> Ps {
        self.closed_at - self.opened_at
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BankState {
    pub open: Option<OpenBank>,
    pub last_act: Option<Ps>,
    pub last_pre: Option<Ps>,
}

/// Time-resolved view of a bank.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Precharged,
    Precharging { pre_time: Ps },
    Activating { row: u32, act_time: Ps },
    Active { row: u32, act_time: Ps },
    HiraRestoring {
        refresh_row: u32,
        refresh_act_time: Ps,
        second_row: u32,
        second_act_time: Ps,
        second_ready: bool,
    },
}

impl BankState {
    pub fn phase(&self, now: Ps, t: &TimingParams) -> Phase {
        match self.open {
            None => match self.last_pre {
                Some(p) if now < p + t.t_rp => Phase::Precharging { pre_time: p },
                _ => Phase::Precharged,
            },
            Some(OpenBank { access, hidden: Some(h), .. }) => Phase::HiraRestoring {
                refresh_row: h.row,
                refresh_act_time: h.act_time,
                second_row: access.row,
                second_act_time: access.act_time,
                second_ready: now >= access.act_time + t.t_rcd,
            },
            Some(OpenBank { access, .. }) => {
                if now < access.act_time + t.t_rcd {
                    Phase::Activating { row: access.row, act_time: access.act_time }
                } else {
                    Phase::Active { row: access.row, act_time: access.act_time }
                }
            }
        }
    }

    /// Row available for column commands, if any.
    pub fn open_access_row(&self) -> Option<u32> {
        self.open.filter(|o| !o.refresh_only).map(|o| o.access.row)
    }
}

/// Rank-level timing state: its banks, the recent ACT history for tFAW and
/// the REF busy window.
#[derive(Debug, Clone)]
pub struct RankState {
    banks: Vec<BankState>,
    recent_acts: VecDeque<Ps>,
    refresh_busy_until: Ps,
    t: TimingParams,
    hira: HiraTimings,
}

impl RankState {
    pub fn new(banks: u32, t: TimingParams, hira: HiraTimings) -> Self {
        RankState {
            banks: vec![BankState::default(); banks as usize],
            recent_acts: VecDeque::with_capacity(5),
            refresh_busy_until: 0,
            t,
            hira,
        }
    }

    pub fn timing(&self) -> &TimingParams {
        &self.t
    }

    pub fn bank(&self, bank: u32) -> &BankState {
        &self.banks[bank as usize]
    }

    pub fn banks(&self) -> &[BankState] {
        &self.banks
    }

    pub fn refresh_busy_until(&self) -> Ps {
        self.refresh_busy_until
    }

    pub fn all_precharged(&self) -> bool {
        self.banks.iter().all(|b| b.open.is_none())
    }

    /// Earliest instant ≥ `now` at which `cmd` can legally issue.
    pub fn earliest_issue(&self, bank: u32, cmd: &CommandKind, now: Ps) -> Result<Ps> {
        let t = &self.t;
        let b = self.banks.get(bank as usize).ok_or_else(|| {
            Error::Protocol(format!("bank {bank} out of range"))
        })?;
        match *cmd {
            CommandKind::Act { .. } => {
                self.require_closed(b, bank, cmd)?;
                Ok(self.act_floor(b, now).max(self.faw_floor(0, 0)))
            }
            CommandKind::Hira { first, second, .. } => {
                self.require_closed(b, bank, cmd)?;
                if first == second {
                    return Err(Error::Protocol("HiRA needs two distinct rows".into()));
                }
                let off = self.hira.second_act_offset();
                let second_floor = self.faw_floor(1, off);
                Ok(self.act_floor(b, now).max(self.faw_floor(0, 0)).max(second_floor))
            }
            CommandKind::Pre => {
                let o = b.open.ok_or_else(|| {
                    Error::Protocol(format!("PRE to precharged bank {bank}"))
                })?;
                Ok(now.max(o.access.act_time + t.t_ras))
            }
            CommandKind::Rd { row, .. } | CommandKind::Wr { row, .. } => {
                match b.open {
                    Some(o) if !o.refresh_only && o.access.row == row => {
                        Ok(now.max(o.access.act_time + t.t_rcd))
                    }
                    _ => Err(Error::Protocol(format!(
                        "{} to row {row} of bank {bank} which has it closed",
                        cmd.name()
                    ))),
                }
            }
            CommandKind::Ref => {
                if !self.all_precharged() {
                    return Err(Error::Protocol("REF with an open bank".into()));
                }
                let mut at = now.max(self.refresh_busy_until);
                for b in &self.banks {
                    if let Some(p) = b.last_pre {
                        at = at.max(p + t.t_rp);
                    }
                    if let Some(a) = b.last_act {
                        at = at.max(a + t.t_rc);
                    }
                }
                Ok(at)
            }
        }
    }

    /// Applies `cmd` at `at`, returning the rows a PRE closed.
    pub fn apply(&mut self, bank: u32, cmd: &CommandKind, at: Ps) -> Result<Vec<ClosedRow>> {
        let earliest = self.earliest_issue(bank, cmd, at)?;
        if earliest != at {
            return Err(Error::Protocol(format!(
                "{} to bank {bank} at {at} ps, earliest legal {earliest} ps",
                cmd.name()
            )));
        }
        let b = &mut self.banks[bank as usize];
        let mut closed = Vec::new();
        match *cmd {
            CommandKind::Act { row, refresh } => {
                b.open = Some(OpenBank {
                    access: OpenRow { row, act_time: at },
                    hidden: None,
                    refresh_only: refresh,
                });
                b.last_act = Some(at);
                self.push_act(at);
            }
            CommandKind::Hira { first, second, second_is_access } => {
                let second_at = at + self.hira.second_act_offset();
                b.open = Some(OpenBank {
                    access: OpenRow { row: second, act_time: second_at },
                    hidden: Some(OpenRow { row: first, act_time: at }),
                    refresh_only: !second_is_access,
                });
                b.last_act = Some(second_at);
                b.last_pre = Some(at + self.hira.t1);
                self.push_act(at);
                self.push_act(second_at);
            }
            CommandKind::Pre => {
                let o = b.open.take().expect("checked by earliest_issue");
                b.last_pre = Some(at);
                if let Some(h) = o.hidden {
                    closed.push(ClosedRow { row: h.row, opened_at: h.act_time, closed_at: at, refresh: true });
                }
                closed.push(ClosedRow {
                    row: o.access.row,
                    opened_at: o.access.act_time,
                    closed_at: at,
                    refresh: o.refresh_only,
                });
            }
            CommandKind::Rd { .. } | CommandKind::Wr { .. } => {}
            CommandKind::Ref => self.refresh_busy_until = at + self.t.t_rfc,
        }
        Ok(closed)
    }

    fn require_closed(&self, b: &BankState, bank: u32, cmd: &CommandKind) -> Result<()> {
        if b.open.is_some() {
            return Err(Error::Protocol(format!("{} to open bank {bank}", cmd.name())));
        }
        Ok(())
    }

    fn act_floor(&self, b: &BankState, now: Ps) -> Ps {
        let t = &self.t;
        let mut at = now.max(self.refresh_busy_until);
        if let Some(p) = b.last_pre {
            at = at.max(p + t.t_rp);
        }
        if let Some(a) = b.last_act {
            at = at.max(a + t.t_rc);
        }
        if let Some(&last) = self.recent_acts.back() {
            at = at.max(last);
        }
        at
    }

    /// Lower bound on the issue time x such that an ACT at x + `offset`,
    /// preceded by `extra` new ACTs of the same sequence, keeps at most four
    /// ACTs in any tFAW window.
    fn faw_floor(&self, extra: usize, offset: Ps) -> Ps {
        let n = self.recent_acts.len();
        if n + extra < 4 {
            return 0;
        }
        let fourth_back = self.recent_acts[n + extra - 4];
        (fourth_back + self.t.t_faw).saturating_sub(offset)
    }

    fn push_act(&mut self, at: Ps) {
        if self.recent_acts.len() == 4 {
            self.recent_acts.pop_front();
        }
        self.recent_acts.push_back(at);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rank() -> RankState {
        RankState::new(4, TimingParams::default(), HiraTimings::default())
    }

    fn act(row: u32) -> CommandKind {
        CommandKind::Act { row, refresh: false }
    }

    #[test]
    fn single_bank_intervals() {
        let mut r = rank();
        r.apply(0, &act(5), 0).unwrap();
        assert_eq!(r.earliest_issue(0, &CommandKind::Rd { row: 5, col: 0 }, 0).unwrap(), 13_500);
        assert_eq!(r.earliest_issue(0, &CommandKind::Pre, 0).unwrap(), 32_000);
        r.apply(0, &CommandKind::Pre, 32_000).unwrap();
        assert_eq!(r.earliest_issue(0, &act(6), 32_000).unwrap(), 46_250);
    }

    #[test]
    fn phases() {
        let t = TimingParams::default();
        let mut r = rank();
        assert_eq!(r.bank(0).phase(0, &t), Phase::Precharged);
        r.apply(0, &act(3), 0).unwrap();
        assert_eq!(r.bank(0).phase(1, &t), Phase::Activating { row: 3, act_time: 0 });
        assert_eq!(r.bank(0).phase(13_500, &t), Phase::Active { row: 3, act_time: 0 });
        r.apply(0, &CommandKind::Pre, 40_000).unwrap();
        assert_eq!(r.bank(0).phase(40_000, &t), Phase::Precharging { pre_time: 40_000 });
        assert_eq!(r.bank(0).phase(54_250, &t), Phase::Precharged);
    }

    #[test]
    fn illegal_combinations() {
        let mut r = rank();
        assert!(matches!(r.earliest_issue(0, &CommandKind::Pre, 0), Err(Error::Protocol(_))));
        assert!(r.earliest_issue(0, &CommandKind::Rd { row: 0, col: 0 }, 0).is_err());
        r.apply(0, &act(1), 0).unwrap();
        assert!(r.earliest_issue(0, &act(2), 0).is_err());
        assert!(r.earliest_issue(0, &CommandKind::Rd { row: 2, col: 0 }, 0).is_err());
        assert!(r.earliest_issue(1, &CommandKind::Ref, 0).is_err());
        // Issuing early is a protocol error, not a silent delay.
        assert!(r.apply(0, &CommandKind::Pre, 10_000).is_err());
    }

    #[test]
    fn refresh_rows_reject_column_commands() {
        let mut r = rank();
        r.apply(0, &CommandKind::Act { row: 9, refresh: true }, 0).unwrap();
        assert!(r.earliest_issue(0, &CommandKind::Rd { row: 9, col: 0 }, 20_000).is_err());
        assert_eq!(r.bank(0).open_access_row(), None);
    }

    #[test]
    fn faw_limits_fifth_act() {
        let mut r = rank();
        for b in 0..4 {
            let at = r.earliest_issue(b, &act(0), 0).unwrap();
            r.apply(b, &act(0), at).unwrap();
        }
        r.apply(0, &CommandKind::Pre, 32_000).unwrap();
        assert_eq!(r.earliest_issue(0, &act(1), 32_000).unwrap(), 46_250);
        let mut r = RankState::new(8, TimingParams::default(), HiraTimings::default());
        for b in 0..4 {
            r.apply(b, &act(0), b as Ps * 2_500).unwrap();
        }
        assert_eq!(r.earliest_issue(4, &act(0), 10_000).unwrap(), 35_000);
    }

    #[test]
    fn hira_pair_then_single_pre_closes_both() {
        let t = TimingParams::default();
        let mut r = rank();
        let cmd = CommandKind::Hira { first: 10, second: 900, second_is_access: true };
        r.apply(0, &cmd, 0).unwrap();
        assert!(matches!(r.bank(0).phase(0, &t), Phase::HiraRestoring { .. }));
        assert_eq!(r.earliest_issue(0, &CommandKind::Rd { row: 900, col: 0 }, 0).unwrap(), 6_000 + 13_500);
        let pre_at = r.earliest_issue(0, &CommandKind::Pre, 0).unwrap();
        assert_eq!(pre_at, 38_000);
        let closed = r.apply(0, &CommandKind::Pre, pre_at).unwrap();
        assert_eq!(closed.len(), 2);
        assert!(closed.iter().all(|c| c.restore_time() >= t.t_ras));
        assert_eq!(closed[0].restore_time(), 38_000);
        assert!(r.all_precharged());
    }

    #[test]
    fn hira_second_act_respects_faw() {
        let mut r = RankState::new(8, TimingParams::default(), HiraTimings::default());
        for b in 0..3 {
            r.apply(b, &act(0), b as Ps * 2_500).unwrap();
        }
        let cmd = CommandKind::Hira { first: 1, second: 2000, second_is_access: false };
        // Four ACTs so far would include both HiRA activations; the second one
        // is the fifth in the window starting at the first plain ACT.
        let at = r.earliest_issue(3, &cmd, 7_500).unwrap();
        assert_eq!(at, 35_000 - 6_000);
    }

    #[test]
    fn ref_blocks_rank() {
        let mut r = rank();
        r.apply(0, &CommandKind::Ref, 0).unwrap();
        assert_eq!(r.earliest_issue(2, &act(0), 0).unwrap(), 350_000);
        assert_eq!(r.earliest_issue(2, &CommandKind::Ref, 0).unwrap(), 350_000);
    }
}
