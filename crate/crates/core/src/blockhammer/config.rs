use serde::{Deserialize, Serialize};

use crate::dram::TimingParams;
use crate::error::{Error, Result};
use crate::sketch::counter_width_for;
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockHammerMode {
    /// Tracks and reports, never delays or throttles.
    #[serde(rename = "observe")]
    ObserveOnly,
    #[default]
    #[serde(rename = "full")]
    FullFunctional,
}

/// How many neighbours an aggressor disturbs and how strongly.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AttackModel {
    #[default]
    DoubleSided,
    /// `c_k[k-1]` is the relative disturbance at distance k; `c_k[0]` is 1.
    ManySided { c_k: Vec<f64> },
}

impl AttackModel {
    /// c_k = ratio^(k-1) for k in 1..=r_blast.
    pub fn geometric(r_blast: u32, ratio: f64) -> Self {
        AttackModel::ManySided { c_k: (0..r_blast).map(|k| ratio.powi(k as i32)).collect() }
    }

    pub fn r_blast(&self) -> u32 {
        match self {
            AttackModel::DoubleSided => 1,
            AttackModel::ManySided { c_k } => c_k.len() as u32,
        }
    }

    pub fn c_k(&self) -> Vec<f64> {
        match self {
            AttackModel::DoubleSided => vec![1.0],
            AttackModel::ManySided { c_k } => c_k.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.c_k();
        if c.is_empty() || c[0] != 1.0 || c[1..].iter().any(|&x| !(x > 0.0 && x < 1.0)) {
            return Err(Error::Config(
                "blast impact factors need c_1 = 1 and 0 < c_k < 1 beyond".into(),
            ));
        }
        Ok(())
    }

    /// n_rh / (2 Σ c_k), before rounding.
    pub fn scaled_threshold(&self, n_rh: u64) -> f64 {
        n_rh as f64 / (2.0 * self.c_k().iter().sum::<f64>())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockHammerConfig {
    pub n_rh: u64,
    pub n_rh_star: u64,
    pub n_bl: u64,
    pub cbf_size: u64,
    pub counter_width: u32,
    pub t_cbf: Ps,
    pub t_refw: Ps,
    pub t_rc: Ps,
    pub t_faw: Ps,
    /// Exact value of the delay formula, in picoseconds.
    pub t_delay_exact: f64,
    /// Enforced delay: the exact value rounded up to whole picoseconds.
    pub t_delay: Ps,
    pub hb_capacity: u64,
    pub mode: BlockHammerMode,
    pub attack_model: AttackModel,
    pub q_max: u32,
}

pub const DEFAULT_Q_MAX: u32 = 16;
const MIN_CBF_SIZE: u64 = 1024;

/// Derives the configuration for threshold `n_rh` with t_cbf = t_refw.
pub fn derive_config(n_rh: u64, model: AttackModel, t: &TimingParams) -> Result<BlockHammerConfig> {
    model.validate()?;
    let n_rh_star = model.scaled_threshold(n_rh).floor() as u64;
    let n_bl = n_rh_star / 2;
    let cbf_size = (MIN_CBF_SIZE.max((1u64 << 23) / n_rh.max(1))).next_power_of_two();
    BlockHammerConfig::from_parts(n_rh, n_rh_star, n_bl, cbf_size, t.t_refw, t, model)
}

/// `t_delay` from the blacklisting threshold and filter lifetime. The
/// denominator is the activation budget left after blacklisting.
pub fn t_delay_formula(t_cbf: Ps, t_refw: Ps, t_rc: Ps, n_rh_star: u64, n_bl: u64) -> Result<f64> {
    let num = t_cbf as f64 - n_bl as f64 * t_rc as f64;
    let den = (t_cbf as f64 / t_refw as f64) * n_rh_star as f64 - n_bl as f64;
    if den <= 0.0 {
        return Err(Error::Config(format!(
            "n_bl {n_bl} leaves no activation budget below n_rh* {n_rh_star}"
        )));
    }
    if num <= 0.0 {
        return Err(Error::Config(format!("n_bl {n_bl} activations do not fit in t_cbf")));
    }
    Ok(num / den)
}

impl BlockHammerConfig {
    /// Builds a configuration from explicit parameters and checks it.
    pub fn from_parts(
        n_rh: u64,
        n_rh_star: u64,
        n_bl: u64,
        cbf_size: u64,
        t_cbf: Ps,
        t: &TimingParams,
        attack_model: AttackModel,
    ) -> Result<Self> {
        let cfg = Self::unchecked(n_rh, n_rh_star, n_bl, cbf_size, t_cbf, t, attack_model)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Like `from_parts` but skips the safety invariants, so deliberately
    /// broken configurations can be built for verification experiments.
    pub fn unchecked(
        n_rh: u64,
        n_rh_star: u64,
        n_bl: u64,
        cbf_size: u64,
        t_cbf: Ps,
        t: &TimingParams,
        attack_model: AttackModel,
    ) -> Result<Self> {
        let t_delay_exact = t_delay_formula(t_cbf, t.t_refw, t.t_rc, n_rh_star, n_bl)?;
        let t_delay = t_delay_exact.ceil() as Ps;
        Ok(BlockHammerConfig {
            n_rh,
            n_rh_star,
            n_bl,
            cbf_size,
            counter_width: counter_width_for(n_bl.max(1)),
            t_cbf,
            t_refw: t.t_refw,
            t_rc: t.t_rc,
            t_faw: t.t_faw,
            t_delay_exact,
            t_delay,
            hb_capacity: hb_capacity(t_delay, t.t_faw),
            mode: BlockHammerMode::FullFunctional,
            attack_model,
            q_max: DEFAULT_Q_MAX,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n_bl < self.n_rh_star && self.n_rh_star <= self.n_rh) {
            return Err(Error::Config(format!(
                "need n_bl < n_rh* <= n_rh, got {} / {} / {}",
                self.n_bl, self.n_rh_star, self.n_rh
            )));
        }
        if self.t_delay <= self.t_rc {
            return Err(Error::Config("t_delay must exceed t_rc".into()));
        }
        if !self.cbf_size.is_power_of_two() {
            return Err(Error::Config(format!("cbf_size {} is not a power of two", self.cbf_size)));
        }
        if !self.t_cbf.is_multiple_of(2) || self.t_cbf == 0 {
            return Err(Error::Config("t_cbf must be a positive even duration".into()));
        }
        if self.hb_capacity < (4.0 * self.t_delay as f64 / self.t_faw as f64).ceil() as u64 {
            return Err(Error::Config("history buffer smaller than 4·t_delay/t_faw".into()));
        }
        Ok(())
    }

    /// D-CBF epoch: half the filter lifetime.
    pub fn epoch_len(&self) -> Ps {
        self.t_cbf / 2
    }

    /// Blacklisted activations a thread may perform before its quota hits 0.
    pub fn rhli_budget(&self) -> f64 {
        self.n_rh_star as f64 * (self.t_cbf as f64 / self.t_refw as f64) - self.n_bl as f64
    }

    /// Saturation bound of the throttler counters.
    pub fn throttler_cap(&self) -> u64 {
        (self.n_rh as f64 * (self.t_cbf as f64 / self.t_refw as f64)).ceil() as u64
    }
}

/// Entries needed to remember every ACT of the last t_delay. A rank can
/// fit four back-to-back activations at the start of each t_faw period, so
/// the bound is 4·ceil(t_delay/t_faw), which is never below
/// ceil(4·t_delay/t_faw).
pub fn hb_capacity(t_delay: Ps, t_faw: Ps) -> u64 {
    4 * t_delay.div_ceil(t_faw)
}
