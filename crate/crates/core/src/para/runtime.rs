use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dram::BankId;
use crate::error::{Error, Result};
use crate::memctrl::Mitigation;
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaConfig {
    pub p_th: f64,
    pub n_rh: u64,
    pub hc_deadline: u64,
}

impl ParaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.p_th > 0.0 && self.p_th < 1.0) {
            return Err(Error::Config(format!("p_th {} outside (0,1)", self.p_th)));
        }
        Ok(())
    }
}

/// Maps one uniform draw `u` to a neighbour of `row`: below p/2 the lower
/// neighbour, below p the upper one. A missing neighbour at the bank edge
/// simply means no refresh.
#[inline]
pub fn neighbour_pick(row: u32, rows_per_bank: u32, p_th: f64, u: f64) -> Option<u32> {
    if u < p_th / 2.0 {
        row.checked_sub(1)
    } else if u < p_th {
        (row + 1 < rows_per_bank).then_some(row + 1)
    } else {
        None
    }
}

/// Draws exactly one uniform value per row closure.
#[derive(Debug, Clone)]
pub struct ParaRuntime {
    p_th: f64,
    rows_per_bank: u32,
    rng: ChaCha8Rng,
    preventive: u64,
}

impl ParaRuntime {
    pub fn new(p_th: f64, rows_per_bank: u32, seed: u64) -> Self {
        ParaRuntime { p_th, rows_per_bank, rng: ChaCha8Rng::seed_from_u64(seed), preventive: 0 }
    }

    pub fn p_th(&self) -> f64 {
        self.p_th
    }

    pub fn on_close(&mut self, row: u32) -> Option<u32> {
        self.on_close_with(row, self.p_th)
    }

    /// Same draw as `on_close` but with a caller-chosen probability.
    pub fn on_close_with(&mut self, row: u32, p_th: f64) -> Option<u32> {
        let u: f64 = self.rng.gen();
        let v = neighbour_pick(row, self.rows_per_bank, p_th, u);
        self.preventive += v.is_some() as u64;
        v
    }

    pub fn preventive_count(&self) -> u64 {
        self.preventive
    }
}

impl Mitigation for ParaRuntime {
    fn on_close(&mut self, _bank: BankId, row: u32, _now: Ps) -> Option<u32> {
        ParaRuntime::on_close(self, row)
    }
}
