use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Symmetric, irreflexive "may be open at the same time" relation between
/// the subarrays of a bank.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubarrayPairsTable {
    n: u32,
    bits: Vec<u64>,
    words: usize,
}

#[derive(Debug, Serialize, Deserialize)]
struct SptFile {
    subarrays: u32,
    pairs: Vec<[u32; 2]>,
}

impl SubarrayPairsTable {
    pub fn empty(subarrays: u32) -> Self {
        let words = (subarrays as usize).div_ceil(64);
        SubarrayPairsTable { n: subarrays, bits: vec![0; words * subarrays as usize], words }
    }

    pub fn from_pairs(subarrays: u32, pairs: &[[u32; 2]]) -> Result<Self> {
        let mut t = Self::empty(subarrays);
        for &[a, b] in pairs {
            if a >= subarrays || b >= subarrays || a == b {
                return Err(Error::Config(format!("invalid subarray pair ({a}, {b})")));
            }
            t.set(a, b);
        }
        Ok(t)
    }

    fn set(&mut self, a: u32, b: u32) {
        for (x, y) in [(a, b), (b, a)] {
            self.bits[x as usize * self.words + y as usize / 64] |= 1 << (y % 64);
        }
    }

    pub fn subarrays(&self) -> u32 {
        self.n
    }

    #[inline]
    pub fn can_pair(&self, a: u32, b: u32) -> bool {
        a != b && self.bits[a as usize * self.words + b as usize / 64] >> (b % 64) & 1 == 1
    }

    pub fn partners(&self, a: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.n).filter(move |&b| self.can_pair(a, b))
    }

    /// Mean over subarrays of the fraction of other subarrays each may pair
    /// with.
    pub fn coverage(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let total: usize = (0..self.n).map(|a| self.partners(a).count()).sum();
        total as f64 / (self.n as f64 * (self.n as f64 - 1.0))
    }

    pub fn pairs(&self) -> Vec<[u32; 2]> {
        let mut v = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.can_pair(a, b) {
                    v.push([a, b]);
                }
            }
        }
        v
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let f: SptFile = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        Self::from_pairs(f.subarrays, &f.pairs)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = SptFile { subarrays: self.n, pairs: self.pairs() };
        let text = serde_json::to_string_pretty(&f).expect("plain data");
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Builds a table whose mean coverage lands within one percentage point of
/// `target`. Subarrays form contiguous groups that never pair internally;
/// a seeded shuffle decides which group pairs are isolated.
pub fn build_spt(subarrays: u32, target: f64, seed: u64) -> Result<SubarrayPairsTable> {
    if !(0.0..1.0).contains(&target) {
        return Err(Error::Config(format!("SPT coverage {target} outside [0,1)")));
    }
    if target == 0.0 {
        return Ok(SubarrayPairsTable::empty(subarrays));
    }
    if subarrays < 2 {
        return Err(Error::Config("SPT pairing needs at least two subarrays".into()));
    }
    let total_pairs = subarrays as f64 * (subarrays as f64 - 1.0) / 2.0;
    // Widest group that still gives 1% coverage resolution.
    let group = [4u32, 2, 1]
        .into_iter()
        .find(|&g| subarrays.is_multiple_of(g) && (g * g) as f64 / total_pairs <= 0.02)
        .unwrap_or(1);
    let groups = subarrays / group;
    let mut group_pairs: Vec<(u32, u32)> =
        (0..groups).flat_map(|a| (a + 1..groups).map(move |b| (a, b))).collect();
    let per_group_pair = (group * group) as f64;
    let max_cov = group_pairs.len() as f64 * per_group_pair / total_pairs;
    if target > max_cov {
        return Err(Error::Config(format!(
            "SPT coverage {target} above the reachable {max_cov:.3}"
        )));
    }
    let k = ((target * total_pairs) / per_group_pair).round() as usize;
    group_pairs.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut t = SubarrayPairsTable::empty(subarrays);
    for &(ga, gb) in &group_pairs[..k] {
        for a in ga * group..(ga + 1) * group {
            for b in gb * group..(gb + 1) * group {
                t.set(a, b);
            }
        }
    }
    let achieved = t.coverage();
    if (achieved - target).abs() > 0.02 {
        return Err(Error::Config(format!(
            "SPT coverage {achieved:.3} misses target {target} for {subarrays} subarrays"
        )));
    }
    Ok(t)
}
