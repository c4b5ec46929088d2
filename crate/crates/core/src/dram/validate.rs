use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use super::bank::CommandKind;
use super::geometry::{BankId, Geometry};
use super::timing::{HiraTimings, TimingParams};
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IssuedCommand {
    pub at: Ps,
    /// For REF, any bank of the target rank.
    pub bank: BankId,
    #[serde(flatten)]
    pub kind: CommandKind,
}

#[derive(Debug, Clone, Default)]
struct BankTrack {
    open: Vec<(u32, Ps)>,
    access_row: Option<u32>,
    last_act: Option<Ps>,
    last_pre: Option<Ps>,
}

/// Re-checks an issued command stream against the timing rules without
/// sharing code with the bank model.
#[derive(Debug, Clone)]
pub struct ReplayValidator {
    geometry: Geometry,
    t: TimingParams,
    hira: HiraTimings,
    banks: Vec<BankTrack>,
    rank_acts: Vec<VecDeque<Ps>>,
    rank_ref_end: Vec<Ps>,
    last_at: Ps,
    checked: u64,
    violations: Vec<String>,
}

impl ReplayValidator {
    pub fn new(geometry: Geometry, t: TimingParams, hira: HiraTimings) -> Self {
        ReplayValidator {
            banks: vec![BankTrack::default(); geometry.total_banks() as usize],
            rank_acts: vec![VecDeque::new(); geometry.total_ranks() as usize],
            rank_ref_end: vec![0; geometry.total_ranks() as usize],
            geometry,
            t,
            hira,
            last_at: 0,
            checked: 0,
            violations: Vec::new(),
        }
    }

    pub fn check_all<'a>(mut self, cmds: impl IntoIterator<Item = &'a IssuedCommand>) -> Vec<String> {
        for c in cmds {
            self.push(c);
        }
        self.finish()
    }

    pub fn commands_checked(&self) -> u64 {
        self.checked
    }

    pub fn violations(&self) -> &[String] {
        &self.violations
    }

    pub fn finish(self) -> Vec<String> {
        self.violations
    }

    pub fn push(&mut self, c: &IssuedCommand) {
        self.checked += 1;
        if c.at < self.last_at {
            self.fail(c, format!("time went backwards from {}", self.last_at));
        }
        self.last_at = c.at;
        let t = self.t;
        let rank = self.geometry.rank_of(c.bank).0 as usize;
        let bi = c.bank.0 as usize;
        match c.kind {
            CommandKind::Act { row, refresh } => {
                self.check_act_bank(c, c.at);
                let b = &mut self.banks[bi];
                b.open = vec![(row, c.at)];
                b.access_row = (!refresh).then_some(row);
                b.last_act = Some(c.at);
                self.record_act(c, rank, c.at);
            }
            CommandKind::Hira { first, second, second_is_access } => {
                self.check_act_bank(c, c.at);
                let second_at = c.at + self.hira.t1 + self.hira.t2;
                let b = &mut self.banks[bi];
                b.open = vec![(first, c.at), (second, second_at)];
                b.access_row = second_is_access.then_some(second);
                b.last_act = Some(second_at);
                b.last_pre = Some(c.at + self.hira.t1);
                self.record_act(c, rank, c.at);
                self.record_act(c, rank, second_at);
            }
            CommandKind::Pre => {
                if self.banks[bi].open.is_empty() {
                    self.fail(c, "PRE to a closed bank".into());
                }
                let short: Vec<u32> = self.banks[bi]
                    .open
                    .iter()
                    .filter(|(_, opened)| c.at < opened + t.t_ras)
                    .map(|(r, _)| *r)
                    .collect();
                for r in short {
                    self.fail(c, format!("row {r} closed before t_ras"));
                }
                let b = &mut self.banks[bi];
                b.open.clear();
                b.access_row = None;
                b.last_pre = Some(c.at);
            }
            CommandKind::Rd { row, .. } | CommandKind::Wr { row, .. } => {
                let b = &self.banks[bi];
                if b.access_row != Some(row) {
                    self.fail(c, format!("column access to row {row} which is not open"));
                } else if let Some(&(_, opened)) = b.open.iter().find(|(r, _)| *r == row) {
                    if c.at < opened + t.t_rcd {
                        self.fail(c, "column access before t_rcd".into());
                    }
                }
            }
            CommandKind::Ref => {
                let per_rank = self.geometry.banks_per_rank as usize;
                let first = rank * per_rank;
                let mut msgs = Vec::new();
                for b in &self.banks[first..first + per_rank] {
                    if !b.open.is_empty() {
                        msgs.push("REF with an open bank".to_string());
                    }
                    if b.last_pre.is_some_and(|p| c.at < p + t.t_rp) {
                        msgs.push("REF before t_rp".to_string());
                    }
                }
                if c.at < self.rank_ref_end[rank] {
                    msgs.push("REF during t_rfc".into());
                }
                for m in msgs {
                    self.fail(c, m);
                }
                self.rank_ref_end[rank] = c.at + t.t_rfc;
            }
        }
    }

    fn check_act_bank(&mut self, c: &IssuedCommand, at: Ps) {
        let t = self.t;
        let rank = self.geometry.rank_of(c.bank).0 as usize;
        let b = &self.banks[c.bank.0 as usize];
        let mut msgs = Vec::new();
        if !b.open.is_empty() {
            msgs.push("activation of an open bank".to_string());
        }
        if b.last_pre.is_some_and(|p| at < p + t.t_rp) {
            msgs.push("ACT before t_rp".into());
        }
        if b.last_act.is_some_and(|a| at < a + t.t_rc) {
            msgs.push("ACT before t_rc".into());
        }
        if at < self.rank_ref_end[rank] {
            msgs.push("ACT during t_rfc".into());
        }
        for m in msgs {
            self.fail(c, m);
        }
    }

    fn record_act(&mut self, c: &IssuedCommand, rank: usize, at: Ps) {
        let window = &mut self.rank_acts[rank];
        while window.front().is_some_and(|&f| f + self.t.t_faw <= at) {
            window.pop_front();
        }
        window.push_back(at);
        if window.len() > 4 {
            let n = window.len();
            self.fail(c, format!("{n} ACTs inside one t_faw window"));
        }
    }

    fn fail(&mut self, c: &IssuedCommand, msg: String) {
        self.violations
            .push(format!("{} bank {} at {} ps: {msg}", c.kind.name(), c.bank.0, c.at));
    }
}
