use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::time::Ps;

/// FIFO of the rank's recent activations, keyed by (bank, row). An entry
/// stays valid for `t_delay` after insertion.
#[derive(Debug, Clone)]
pub struct HistoryBuffer {
    entries: VecDeque<(u32, u32, Ps)>,
    index: HashMap<(u32, u32), (u32, Ps)>,
    capacity: usize,
    t_delay: Ps,
    peak: usize,
}

impl HistoryBuffer {
    pub fn new(capacity: usize, t_delay: Ps) -> Self {
        HistoryBuffer {
            entries: VecDeque::with_capacity(capacity),
            index: HashMap::new(),
            capacity,
            t_delay,
            peak: 0,
        }
    }

    /// Drops entries that are no longer valid at `now`.
    pub fn expire(&mut self, now: Ps) {
        while let Some(&(bank, row, at)) = self.entries.front() {
            if at + self.t_delay > now {
                break;
            }
            self.entries.pop_front();
            let slot = self.index.get_mut(&(bank, row)).expect("indexed entry");
            slot.0 -= 1;
            if slot.0 == 0 {
                self.index.remove(&(bank, row));
            }
        }
    }

    pub fn push(&mut self, bank: u32, row: u32, now: Ps) -> Result<()> {
        self.expire(now);
        if self.entries.len() == self.capacity {
            return Err(Error::Invariant(format!(
                "history buffer overflow ({} entries) at {now} ps",
                self.capacity
            )));
        }
        self.entries.push_back((bank, row, now));
        let slot = self.index.entry((bank, row)).or_insert((0, now));
        slot.0 += 1;
        slot.1 = now;
        self.peak = self.peak.max(self.entries.len());
        Ok(())
    }

    /// Insert time of the newest valid entry for (bank, row).
    pub fn last_valid(&self, bank: u32, row: u32, now: Ps) -> Option<Ps> {
        self.index
            .get(&(bank, row))
            .map(|&(_, at)| at)
            .filter(|&at| at + self.t_delay > now)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn peak(&self) -> usize {
        self.peak
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}
