use std::collections::HashMap;

/// Per <thread, bank> pair of time-interleaved counters of blacklisted-row
/// activations. The active counter is cleared and handed the passive role
/// whenever the D-CBFs swap.
#[derive(Debug, Clone)]
pub struct Throttler {
    counters: HashMap<(u32, u32), [u64; 2]>,
    active: usize,
    cap: u64,
    budget: f64,
    q_max: u32,
}

impl Throttler {
    pub fn new(cap: u64, budget: f64, q_max: u32) -> Self {
        Throttler { counters: HashMap::new(), active: 0, cap, budget, q_max }
    }

    pub fn record_blacklisted_act(&mut self, thread: u32, bank: u32) {
        let c = self.counters.entry((thread, bank)).or_insert([0; 2]);
        for v in c.iter_mut() {
            *v = (*v + 1).min(self.cap);
        }
    }

    pub fn swap(&mut self) {
        let a = self.active;
        for c in self.counters.values_mut() {
            c[a] = 0;
        }
        self.counters.retain(|_, c| c[0] != 0 || c[1] != 0);
        self.active = 1 - a;
    }

    pub fn active_count(&self, thread: u32, bank: u32) -> u64 {
        self.counters.get(&(thread, bank)).map_or(0, |c| c[self.active])
    }

    pub fn rhli(&self, thread: u32, bank: u32) -> f64 {
        self.active_count(thread, bank) as f64 / self.budget
    }

    pub fn quota(&self, thread: u32, bank: u32) -> u32 {
        quota_for(self.rhli(thread, bank), self.q_max)
    }

    /// (thread, bank, rhli) for every pair with a nonzero active counter,
    /// sorted.
    pub fn snapshot(&self) -> Vec<(u32, u32, f64)> {
        let mut v: Vec<_> = self
            .counters
            .iter()
            .filter(|(_, c)| c[self.active] > 0)
            .map(|(&(t, b), c)| (t, b, c[self.active] as f64 / self.budget))
            .collect();
        v.sort_by_key(|a| (a.0, a.1));
        v
    }
}

/// ceil(q_max·(1 − rhli)), or 0 once rhli reaches 1.
pub fn quota_for(rhli: f64, q_max: u32) -> u32 {
    if rhli >= 1.0 {
        0
    } else {
        (q_max as f64 * (1.0 - rhli)).ceil() as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quota_formula() {
        assert_eq!(quota_for(0.0, 16), 16);
        assert_eq!(quota_for(0.5, 16), 8);
        assert_eq!(quota_for(1.0, 16), 0);
        assert_eq!(quota_for(3.0, 16), 0);
        assert_eq!(quota_for(0.01, 16), 16);
    }

    #[test]
    fn counters_interleave() {
        let mut t = Throttler::new(100, 10.0, 16);
        assert_eq!(t.rhli(0, 0), 0.0);
        for _ in 0..10 {
            t.record_blacklisted_act(0, 0);
        }
        assert_eq!(t.rhli(0, 0), 1.0);
        assert_eq!(t.quota(0, 0), 0);
        t.swap();
        assert_eq!(t.active_count(0, 0), 10, "passive counter carries the history");
        t.swap();
        assert_eq!(t.active_count(0, 0), 0);
    }

    #[test]
    fn saturates() {
        let mut t = Throttler::new(3, 10.0, 16);
        for _ in 0..10 {
            t.record_blacklisted_act(1, 2);
        }
        assert_eq!(t.active_count(1, 2), 3);
    }
}
