use std::collections::{HashMap, VecDeque};

use crate::time::Ps;

/// Exact per-row maximum of activations inside any window of length
/// `window` (half-open: an ACT at t counts for windows (t - window, t]).
#[derive(Debug, Clone)]
pub struct WindowOracle {
    window: Ps,
    recent: HashMap<u64, VecDeque<Ps>>,
    row_max: HashMap<u64, u64>,
    max: u64,
    max_row: Option<u64>,
    total: u64,
}

impl WindowOracle {
    pub fn new(window: Ps) -> Self {
        WindowOracle {
            window,
            recent: HashMap::new(),
            row_max: HashMap::new(),
            max: 0,
            max_row: None,
            total: 0,
        }
    }

    /// Records an activation of `row` (a global row id). Timestamps of one
    /// row must not decrease.
    pub fn push(&mut self, row: u64, at: Ps) {
        let q = self.recent.entry(row).or_default();
        debug_assert!(q.back().is_none_or(|&b| b <= at));
        while q.front().is_some_and(|&f| f + self.window <= at) {
            q.pop_front();
        }
        q.push_back(at);
        let n = q.len() as u64;
        let m = self.row_max.entry(row).or_default();
        *m = (*m).max(n);
        if n > self.max {
            self.max = n;
            self.max_row = Some(row);
        }
        self.total += 1;
    }

    pub fn max(&self) -> u64 {
        self.max
    }

    pub fn max_row(&self) -> Option<u64> {
        self.max_row
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn row_max(&self, row: u64) -> u64 {
        self.row_max.get(&row).copied().unwrap_or(0)
    }

    pub fn rows(&self) -> impl Iterator<Item = (u64, u64)> + '_ {
        self.row_max.iter().map(|(&r, &m)| (r, m))
    }
}

/// O(n²) recount used to check the oracle: for every ACT, count the ACTs of
/// the same row in the window ending at it.
pub fn naive_window_max(acts: &[(u64, Ps)], window: Ps) -> HashMap<u64, u64> {
    let mut out = HashMap::new();
    for &(row, end) in acts {
        let n = acts
            .iter()
            .filter(|&&(r, t)| r == row && t <= end && t + window > end)
            .count() as u64;
        let m = out.entry(row).or_insert(0);
        *m = (*m).max(n);
    }
    out
}
