use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical organization of the simulated memory system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Geometry {
    pub channels: u32,
    pub ranks_per_channel: u32,
    pub banks_per_rank: u32,
    pub subarrays_per_bank: u32,
    pub rows_per_bank: u32,
    pub columns_per_row: u32,
}

impl Default for Geometry {
    /// One DDR4 rank: 16 banks of 64K rows, 128 subarrays per bank, 8 KiB rows.
    fn default() -> Self {
        Geometry {
            channels: 1,
            ranks_per_channel: 1,
            banks_per_rank: 16,
            subarrays_per_bank: 128,
            rows_per_bank: 65_536,
            columns_per_row: 1_024,
        }
    }
}

/// Flat bank index across the whole system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BankId(pub u32);

/// Flat rank index across the whole system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RankId(pub u32);

impl Geometry {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("channels", self.channels),
            ("ranks_per_channel", self.ranks_per_channel),
            ("banks_per_rank", self.banks_per_rank),
            ("subarrays_per_bank", self.subarrays_per_bank),
            ("rows_per_bank", self.rows_per_bank),
            ("columns_per_row", self.columns_per_row),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("geometry.{name} must be >= 1")));
            }
        }
        if !self.rows_per_bank.is_multiple_of(self.subarrays_per_bank) {
            return Err(Error::Config(format!(
                "rows_per_bank ({}) must be divisible by subarrays_per_bank ({})",
                self.rows_per_bank, self.subarrays_per_bank
            )));
        }
        Ok(())
    }

    pub fn rows_per_subarray(&self) -> u32 {
        self.rows_per_bank / self.subarrays_per_bank
    }

    pub fn subarray_of(&self, row: u32) -> u32 {
        row / self.rows_per_subarray()
    }

    pub fn total_ranks(&self) -> u32 {
        self.channels * self.ranks_per_channel
    }

    pub fn total_banks(&self) -> u32 {
        self.total_ranks() * self.banks_per_rank
    }

    pub fn total_rows(&self) -> u64 {
        self.total_banks() as u64 * self.rows_per_bank as u64
    }

    pub fn bank_id(&self, channel: u32, rank: u32, bank: u32) -> BankId {
        BankId((channel * self.ranks_per_channel + rank) * self.banks_per_rank + bank)
    }

    pub fn rank_id(&self, channel: u32, rank: u32) -> RankId {
        RankId(channel * self.ranks_per_channel + rank)
    }

    pub fn rank_of(&self, bank: BankId) -> RankId {
        RankId(bank.0 / self.banks_per_rank)
    }

    /// Splits a flat bank id into (channel, rank, bank-in-rank).
    pub fn split_bank(&self, bank: BankId) -> (u32, u32, u32) {
        let b = bank.0 % self.banks_per_rank;
        let r = bank.0 / self.banks_per_rank;
        (r / self.ranks_per_channel, r % self.ranks_per_channel, b)
    }

    /// Flat row index over all banks, used to key per-row profiles.
    pub fn global_row(&self, bank: BankId, row: u32) -> u64 {
        bank.0 as u64 * self.rows_per_bank as u64 + row as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_zero_counts_and_uneven_subarrays() {
        let mut g = Geometry::default();
        assert!(g.validate().is_ok());
        g.banks_per_rank = 0;
        assert!(g.validate().is_err());
        let mut g = Geometry::default();
        g.subarrays_per_bank = 3;
        assert!(matches!(g.validate(), Err(Error::Config(_))));
    }

    #[test]
    fn bank_ids_round_trip() {
        let g = Geometry {
            channels: 2,
            ranks_per_channel: 2,
            banks_per_rank: 4,
            ..Geometry::default()
        };
        for c in 0..2 {
            for r in 0..2 {
                for b in 0..4 {
                    let id = g.bank_id(c, r, b);
                    assert_eq!(g.split_bank(id), (c, r, b));
                    assert_eq!(g.rank_of(id), g.rank_id(c, r));
                }
            }
        }
        assert_eq!(g.total_banks(), 16);
    }
}
