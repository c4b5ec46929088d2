use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{BlockHammerConfig, BlockHammerMode};
use super::history::HistoryBuffer;
use super::throttler::Throttler;
use crate::dram::{BankId, Geometry};
use crate::error::Result;
use crate::memctrl::{ActSafety, Mitigation};
use crate::sketch::DualCbf;
use crate::time::Ps;

/// RowBlocker (one D-CBF per bank, one history buffer per rank) plus the
/// AttackThrottler.
#[derive(Debug, Clone)]
pub struct BlockHammer {
    cfg: BlockHammerConfig,
    geometry: Geometry,
    filters: Vec<DualCbf>,
    history: Vec<HistoryBuffer>,
    throttler: Throttler,
    blacklisted_acts: u64,
}

impl BlockHammer {
    /// Filter seeds are drawn in bank order from a ChaCha8 stream seeded
    /// with `seed`.
    pub fn new(cfg: BlockHammerConfig, geometry: Geometry, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let filters = (0..geometry.total_banks())
            .map(|_| DualCbf::new(cfg.cbf_size as usize, cfg.counter_width, cfg.epoch_len(), rng.gen()))
            .collect();
        let history = (0..geometry.total_ranks())
            .map(|_| HistoryBuffer::new(cfg.hb_capacity as usize, cfg.t_delay))
            .collect();
        let throttler = Throttler::new(cfg.throttler_cap(), cfg.rhli_budget(), cfg.q_max);
        BlockHammer { cfg, geometry, filters, history, throttler, blacklisted_acts: 0 }
    }

    pub fn config(&self) -> &BlockHammerConfig {
        &self.cfg
    }

    pub fn is_blacklisted(&self, bank: BankId, row: u32) -> bool {
        self.filters[bank.0 as usize].test(row as u64) as u64 >= self.cfg.n_bl
    }

    pub fn filter(&self, bank: BankId) -> &DualCbf {
        &self.filters[bank.0 as usize]
    }

    pub fn history(&self, bank: BankId) -> &HistoryBuffer {
        &self.history[self.geometry.rank_of(bank).0 as usize]
    }

    pub fn rhli(&self, thread: u32, bank: BankId) -> f64 {
        self.throttler.rhli(thread, bank.0)
    }

    pub fn throttler(&self) -> &Throttler {
        &self.throttler
    }

    pub fn blacklisted_acts(&self) -> u64 {
        self.blacklisted_acts
    }

    pub fn peak_history_occupancy(&self) -> usize {
        self.history.iter().map(HistoryBuffer::peak).max().unwrap_or(0)
    }
}

impl Mitigation for BlockHammer {
    fn advance(&mut self, now: Ps) -> Result<()> {
        // Every bank shares the epoch grid, so all filters swap together.
        let mut swaps = 0;
        for f in &mut self.filters {
            swaps = f.advance(now);
        }
        for _ in 0..swaps {
            self.throttler.swap();
        }
        Ok(())
    }

    fn next_event(&self, _now: Ps) -> Option<Ps> {
        self.filters.first().map(DualCbf::next_swap)
    }

    fn is_act_safe(&self, bank: BankId, row: u32, now: Ps) -> ActSafety {
        if self.cfg.mode == BlockHammerMode::ObserveOnly || !self.is_blacklisted(bank, row) {
            return ActSafety::Safe;
        }
        match self.history(bank).last_valid(bank.0, row, now) {
            Some(at) => ActSafety::Unsafe { retry_after: at + self.cfg.t_delay },
            None => ActSafety::Safe,
        }
    }

    fn quota(&self, thread: u32, bank: BankId) -> Option<u32> {
        match self.cfg.mode {
            BlockHammerMode::ObserveOnly => None,
            BlockHammerMode::FullFunctional => Some(self.throttler.quota(thread, bank.0)),
        }
    }

    fn on_act(&mut self, bank: BankId, row: u32, thread: Option<u32>, now: Ps) -> Result<()> {
        if self.is_blacklisted(bank, row) {
            self.blacklisted_acts += 1;
            if let Some(t) = thread {
                self.throttler.record_blacklisted_act(t, bank.0);
            }
        }
        self.filters[bank.0 as usize].insert(row as u64);
        let rank = self.geometry.rank_of(bank).0 as usize;
        self.history[rank].push(bank.0, row, now)
    }

    fn rhli_snapshot(&self) -> Vec<(u32, u32, f64)> {
        self.throttler.snapshot()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockhammer::{derive_config, AttackModel};
    use crate::dram::TimingParams;

    fn engine(n_rh: u64) -> BlockHammer {
        let t = TimingParams::default();
        let cfg = derive_config(n_rh, AttackModel::DoubleSided, &t).unwrap();
        BlockHammer::new(cfg, Geometry::default(), 1)
    }

    #[test]
    fn fresh_row_is_safe() {
        let bh = engine(1024);
        assert_eq!(bh.is_act_safe(BankId(0), 5, 0), ActSafety::Safe);
    }

    #[test]
    fn blacklisted_recent_row_waits_t_delay() {
        let mut bh = engine(1024);
        let n_bl = bh.config().n_bl;
        let t_delay = bh.config().t_delay;
        let mut now = 0;
        for _ in 0..n_bl {
            bh.on_act(BankId(0), 5, Some(0), now).unwrap();
            now += 46_250;
        }
        let last = now - 46_250;
        assert!(bh.is_blacklisted(BankId(0), 5));
        assert_eq!(
            bh.is_act_safe(BankId(0), 5, last + 1_000),
            ActSafety::Unsafe { retry_after: last + t_delay }
        );
        assert_eq!(bh.is_act_safe(BankId(0), 5, last + t_delay), ActSafety::Safe);
        assert_eq!(bh.throttler().active_count(0, 0), 0, "ACTs before blacklisting are not counted");
        bh.on_act(BankId(0), 5, Some(0), last + t_delay).unwrap();
        assert_eq!(bh.throttler().active_count(0, 0), 1);
    }

    #[test]
    fn observe_mode_never_blocks() {
        let t = TimingParams::default();
        let mut cfg = derive_config(1024, AttackModel::DoubleSided, &t).unwrap();
        cfg.mode = BlockHammerMode::ObserveOnly;
        let mut bh = BlockHammer::new(cfg, Geometry::default(), 1);
        for i in 0..600 {
            bh.on_act(BankId(0), 5, Some(0), i * 46_250).unwrap();
        }
        assert_eq!(bh.is_act_safe(BankId(0), 5, 600 * 46_250), ActSafety::Safe);
        assert_eq!(bh.quota(0, BankId(0)), None);
        assert!(bh.rhli(0, BankId(0)) > 0.0);
    }
}
