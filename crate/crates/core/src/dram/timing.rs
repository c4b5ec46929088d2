use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Ps;

/// DRAM timing constraints in integer picoseconds.
///
/// Defaults follow a DDR4 device: tRC 46.25 ns, tRAS 32 ns, tRP 14.25 ns,
/// tRCD 13.5 ns, tFAW 35 ns, a 64 ms refresh window with 8192 REF commands
/// (tREFI 7.8125 us) of 350 ns each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimingParams {
    pub t_rc: Ps,
    pub t_ras: Ps,
    pub t_rp: Ps,
    pub t_rcd: Ps,
    pub t_faw: Ps,
    pub t_refw: Ps,
    pub t_refi: Ps,
    pub t_rfc: Ps,
    pub t_cl: Ps,
}

impl Default for TimingParams {
    fn default() -> Self {
        TimingParams {
            t_rc: 46_250,
            t_ras: 32_000,
            t_rp: 14_250,
            t_rcd: 13_500,
            t_faw: 35_000,
            t_refw: 64_000_000_000,
            t_refi: 7_812_500,
            t_rfc: 350_000,
            t_cl: 13_750,
        }
    }
}

impl TimingParams {
    pub fn validate(&self) -> Result<()> {
        let all = [
            ("t_rc", self.t_rc),
            ("t_ras", self.t_ras),
            ("t_rp", self.t_rp),
            ("t_rcd", self.t_rcd),
            ("t_faw", self.t_faw),
            ("t_refw", self.t_refw),
            ("t_refi", self.t_refi),
            ("t_rfc", self.t_rfc),
            ("t_cl", self.t_cl),
        ];
        for (name, v) in all {
            if v == 0 {
                return Err(Error::Config(format!("timing.{name} must be positive")));
            }
        }
        if self.t_rc < self.t_ras.max(self.t_rp) {
            return Err(Error::Config(format!(
                "t_rc ({}) must be >= max(t_ras, t_rp)",
                self.t_rc
            )));
        }
        if self.t_refi >= self.t_refw {
            return Err(Error::Config("t_refi must be shorter than t_refw".into()));
        }
        Ok(())
    }

    /// Number of REF commands per refresh window.
    pub fn refs_per_window(&self) -> u64 {
        self.t_refw / self.t_refi
    }
}

/// The two deliberately violated intervals of a HiRA ACT-PRE-ACT sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HiraTimings {
    /// ACT (first row) to PRE.
    pub t1: Ps,
    /// PRE to ACT (second row).
    pub t2: Ps,
}

impl Default for HiraTimings {
    fn default() -> Self {
        HiraTimings { t1: 3_000, t2: 3_000 }
    }
}

impl HiraTimings {
    pub fn validate(&self, t: &TimingParams) -> Result<()> {
        if self.t1 == 0 || self.t2 == 0 {
            return Err(Error::Config("HiRA t1 and t2 must be positive".into()));
        }
        if self.t1 + self.t2 >= t.t_rc {
            return Err(Error::Config("HiRA t1 + t2 must be below t_rc".into()));
        }
        Ok(())
    }

    /// Offset of the second ACT from the first.
    pub fn second_act_offset(&self) -> Ps {
        self.t1 + self.t2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_consistent() {
        let t = TimingParams::default();
        t.validate().unwrap();
        assert_eq!(t.refs_per_window(), 8192);
        HiraTimings::default().validate(&t).unwrap();
    }

    #[test]
    fn rejects_short_trc_and_long_trefi() {
        let mut t = TimingParams::default();
        t.t_rc = 20_000;
        assert!(t.validate().is_err());
        let mut t = TimingParams::default();
        t.t_refi = t.t_refw;
        assert!(t.validate().is_err());
    }
}
