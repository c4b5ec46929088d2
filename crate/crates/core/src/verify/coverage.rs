use serde::Serialize;

use crate::dram::{BankId, Geometry};
use crate::time::Ps;

/// How retention coverage is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CoverageRule {
    /// Consecutive refreshes of a row are at most t_refw apart (REF).
    Interval,
    /// Every row is refreshed inside every aligned window [k·t_refw,
    /// (k+1)·t_refw) (HiRA-MC's per-window scheduling).
    AlignedWindow,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoverageReport {
    pub rows: u64,
    pub windows_checked: u64,
    pub violations: u64,
    pub first_violations: Vec<String>,
}

/// Tracks periodic refreshes of every row of a set of banks.
#[derive(Debug, Clone)]
pub struct RefreshCoverage {
    rule: CoverageRule,
    t_refw: Ps,
    rows_per_bank: u32,
    banks: Vec<BankId>,
    /// Interval: last refresh time. AlignedWindow: last window index + 1.
    last: Vec<Ps>,
    window: u64,
    report: CoverageReport,
}

impl RefreshCoverage {
    pub fn new(geometry: &Geometry, banks: Vec<BankId>, t_refw: Ps, rule: CoverageRule) -> Self {
        let rows = banks.len() * geometry.rows_per_bank as usize;
        RefreshCoverage {
            rule,
            t_refw,
            rows_per_bank: geometry.rows_per_bank,
            banks,
            last: vec![0; rows],
            window: 0,
            report: CoverageReport { rows: rows as u64, ..CoverageReport::default() },
        }
    }

    fn index(&self, bank: BankId, row: u32) -> Option<usize> {
        let b = self.banks.iter().position(|&x| x == bank)?;
        Some(b * self.rows_per_bank as usize + row as usize)
    }

    fn violation(&mut self, msg: impl FnOnce() -> String) {
        self.report.violations += 1;
        if self.report.first_violations.len() < 10 {
            self.report.first_violations.push(msg());
        }
    }

    /// Closes every aligned window that ends at or before `now`.
    pub fn advance(&mut self, now: Ps) {
        if self.rule != CoverageRule::AlignedWindow {
            return;
        }
        while (self.window + 1) * self.t_refw <= now {
            let k = self.window;
            let missed: Vec<usize> =
                self.last.iter().enumerate().filter(|&(_, &v)| v != k + 1).map(|(i, _)| i).collect();
            for i in missed {
                let (bank, row) = (self.banks[i / self.rows_per_bank as usize], i % self.rows_per_bank as usize);
                self.violation(|| format!("bank {} row {row} not refreshed in window {k}", bank.0));
            }
            self.report.windows_checked += 1;
            self.window += 1;
        }
    }

    pub fn refreshed(&mut self, bank: BankId, first: u32, end: u32, at: Ps) {
        self.advance(at);
        let Some(base) = self.index(bank, 0) else { return };
        for row in first..end {
            let i = base + row as usize;
            match self.rule {
                CoverageRule::Interval => {
                    let prev = self.last[i];
                    if at - prev > self.t_refw {
                        self.violation(|| format!("bank {} row {row}: {} ps between refreshes", bank.0, at - prev));
                    }
                    self.last[i] = at;
                }
                CoverageRule::AlignedWindow => self.last[i] = at / self.t_refw + 1,
            }
        }
    }

    /// Final check at simulation end.
    pub fn finish(mut self, end: Ps) -> CoverageReport {
        match self.rule {
            CoverageRule::AlignedWindow => self.advance(end),
            CoverageRule::Interval => {
                for i in 0..self.last.len() {
                    let prev = self.last[i];
                    if end - prev > self.t_refw {
                        let (bank, row) = (self.banks[i / self.rows_per_bank as usize], i % self.rows_per_bank as usize);
                        self.violation(|| format!("bank {} row {row}: not refreshed since {prev} ps", bank.0));
                    }
                }
                self.report.windows_checked = end / self.t_refw;
            }
        }
        self.report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Geometry {
        Geometry { banks_per_rank: 1, rows_per_bank: 4, subarrays_per_bank: 2, ..Geometry::default() }
    }

    #[test]
    fn aligned_window_flags_missing_row() {
        let mut c = RefreshCoverage::new(&g(), vec![BankId(0)], 100, CoverageRule::AlignedWindow);
        c.refreshed(BankId(0), 0, 4, 10);
        c.refreshed(BankId(0), 0, 3, 150);
        let r = c.finish(200);
        assert_eq!(r.windows_checked, 2);
        assert_eq!(r.violations, 1);
    }

    #[test]
    fn interval_rule() {
        let mut c = RefreshCoverage::new(&g(), vec![BankId(0)], 100, CoverageRule::Interval);
        c.refreshed(BankId(0), 0, 4, 100);
        c.refreshed(BankId(0), 0, 2, 200);
        let r = c.finish(201);
        assert_eq!(r.violations, 2);
    }
}
