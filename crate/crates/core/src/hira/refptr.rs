use super::spt::SubarrayPairsTable;

/// Per-bank, per-subarray pointer to the next row to refresh, plus how many
/// rows of that subarray were refreshed in the current window.
#[derive(Debug, Clone)]
pub struct RefPtrTable {
    rows_per_subarray: u32,
    subarrays: u32,
    next: Vec<u32>,
    count: Vec<u32>,
    window: Vec<u64>,
}

impl RefPtrTable {
    pub fn new(banks: u32, subarrays: u32, rows_per_subarray: u32) -> Self {
        let n = (banks * subarrays) as usize;
        RefPtrTable {
            rows_per_subarray,
            subarrays,
            next: vec![0; n],
            count: vec![0; n],
            window: vec![0; banks as usize],
        }
    }

    fn sync(&mut self, bank: u32, window: u64) {
        if window > self.window[bank as usize] {
            self.window[bank as usize] = window;
            let base = (bank * self.subarrays) as usize;
            self.count[base..base + self.subarrays as usize].fill(0);
        }
    }

    fn idx(&self, bank: u32, s: u32) -> usize {
        (bank * self.subarrays + s) as usize
    }

    /// Subarray with the fewest refreshes this window among those with rows
    /// left, optionally restricted to partners of `with`.
    pub fn pick(&mut self, bank: u32, window: u64, spt: &SubarrayPairsTable, with: Option<u32>) -> Option<u32> {
        self.sync(bank, window);
        (0..self.subarrays)
            .filter(|&s| with.is_none_or(|w| spt.can_pair(s, w)))
            .filter(|&s| self.count[self.idx(bank, s)] < self.rows_per_subarray)
            .min_by_key(|&s| (self.count[self.idx(bank, s)], s))
    }

    /// Row the pointer of `subarray` designates, without advancing.
    pub fn peek(&self, bank: u32, subarray: u32) -> u32 {
        subarray * self.rows_per_subarray + self.next[self.idx(bank, subarray)]
    }

    /// Consumes the pointed-to row and advances the pointer.
    pub fn take(&mut self, bank: u32, window: u64, subarray: u32) -> u32 {
        self.sync(bank, window);
        let i = self.idx(bank, subarray);
        let row = subarray * self.rows_per_subarray + self.next[i];
        self.next[i] = (self.next[i] + 1) % self.rows_per_subarray;
        self.count[i] += 1;
        row
    }

    pub fn refreshed(&self, bank: u32, subarray: u32) -> u32 {
        self.count[self.idx(bank, subarray)]
    }
}
