use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::profile::VulnerabilityProfile;
use crate::dram::{BankId, Geometry};
use crate::error::{Error, Result};
use crate::memctrl::Mitigation;
use crate::para::{solve_pth, ParaRuntime, ParaSolverInput};
use crate::time::Ps;

/// Which rows decide the HC_first used for an activation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LookupScope {
    ActivatedRow,
    /// Weakest row within the blast radius, the activated row included.
    #[default]
    BlastRadiusMin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SvardConfig {
    pub enabled: bool,
    pub lookup_scope: LookupScope,
    pub r_blast: u32,
}

impl Default for SvardConfig {
    fn default() -> Self {
        SvardConfig { enabled: true, lookup_scope: LookupScope::BlastRadiusMin, r_blast: 1 }
    }
}

/// PARA whose probability follows the vulnerability of the rows around
/// each closed row. Disabled, it is plain PARA at the profile's worst case.
#[derive(Debug, Clone)]
pub struct SvardPara {
    cfg: SvardConfig,
    profile: Arc<VulnerabilityProfile>,
    geometry: Geometry,
    bin_pth: Vec<f64>,
    runtime: ParaRuntime,
    per_bin_closures: Vec<u64>,
}

impl SvardPara {
    /// Solves one p_th per bin with `base` as the template (its n_rh is
    /// replaced by each bin's HC_first).
    pub fn new(
        profile: Arc<VulnerabilityProfile>,
        cfg: SvardConfig,
        geometry: Geometry,
        base: ParaSolverInput,
        seed: u64,
    ) -> Result<Self> {
        if profile.rows() != geometry.total_rows() {
            return Err(Error::Profile(format!(
                "profile covers {} rows, geometry has {}",
                profile.rows(),
                geometry.total_rows()
            )));
        }
        let bin_pth = profile
            .bin_hcfirst()
            .iter()
            .map(|&hc| solve_pth(&ParaSolverInput { n_rh: hc, ..base }))
            .collect::<Result<Vec<_>>>()?;
        let bins = bin_pth.len();
        Ok(SvardPara {
            cfg,
            profile,
            geometry,
            bin_pth,
            runtime: ParaRuntime::new(0.0, geometry.rows_per_bank, seed),
            per_bin_closures: vec![0; bins],
        })
    }

    pub fn bin_pth(&self) -> &[f64] {
        &self.bin_pth
    }

    pub fn profile(&self) -> &VulnerabilityProfile {
        &self.profile
    }

    pub fn preventive_count(&self) -> u64 {
        self.runtime.preventive_count()
    }

    /// Closures handled per effective bin.
    pub fn per_bin_closures(&self) -> &[u64] {
        &self.per_bin_closures
    }

    fn bin_for_act(&self, bank: BankId, row: u32) -> u8 {
        if !self.cfg.enabled {
            return 0;
        }
        let base = self.geometry.global_row(bank, 0);
        let (lo, hi) = match self.cfg.lookup_scope {
            LookupScope::ActivatedRow => (row, row),
            LookupScope::BlastRadiusMin => (
                row.saturating_sub(self.cfg.r_blast),
                row.saturating_add(self.cfg.r_blast).min(self.geometry.rows_per_bank - 1),
            ),
        };
        // Bins ascend with HC_first, so the weakest row has the lowest bin.
        (lo..=hi).map(|r| self.profile.bin(base + r as u64)).min().expect("non-empty range")
    }

    /// HC_first the mechanism protects for an activation of `row`.
    pub fn hcfirst_for_act(&self, bank: BankId, row: u32) -> u64 {
        self.profile.bin_hcfirst()[self.bin_for_act(bank, row) as usize]
    }

    pub fn pth_for_act(&self, bank: BankId, row: u32) -> f64 {
        self.bin_pth[self.bin_for_act(bank, row) as usize]
    }

    pub fn on_close(&mut self, bank: BankId, row: u32) -> Option<u32> {
        let bin = self.bin_for_act(bank, row) as usize;
        self.per_bin_closures[bin] += 1;
        self.runtime.on_close_with(row, self.bin_pth[bin])
    }
}

impl Mitigation for SvardPara {
    fn on_close(&mut self, bank: BankId, row: u32, _now: Ps) -> Option<u32> {
        SvardPara::on_close(self, bank, row)
    }
}
