use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::cbf::CountingBloomFilter;
use crate::error::{Error, Result};
use crate::time::Ps;

/// Two time-interleaved counting Bloom filters. Both receive every insert,
/// only the active one answers tests, and every `epoch_len` the active one
/// is cleared, reseeded and handed the passive role.
#[derive(Debug, Clone)]
pub struct DualCbf {
    filters: [CountingBloomFilter; 2],
    active: usize,
    epoch_len: Ps,
    last_clear: Ps,
    rng: ChaCha8Rng,
}

impl DualCbf {
    pub fn new(size: usize, width: u32, epoch_len: Ps, seed: u64) -> Self {
        assert!(epoch_len > 0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CountingBloomFilter::new(size, width, rng.gen());
        let b = CountingBloomFilter::new(size, width, rng.gen());
        DualCbf { filters: [a, b], active: 0, epoch_len, last_clear: 0, rng }
    }

    pub fn epoch_len(&self) -> Ps {
        self.epoch_len
    }

    pub fn last_clear(&self) -> Ps {
        self.last_clear
    }

    pub fn next_swap(&self) -> Ps {
        self.last_clear + self.epoch_len
    }

    pub fn active(&self) -> &CountingBloomFilter {
        &self.filters[self.active]
    }

    pub fn passive(&self) -> &CountingBloomFilter {
        &self.filters[1 - self.active]
    }

    pub fn active_index(&self) -> usize {
        self.active
    }

    pub fn insert(&mut self, key: u64) {
        self.filters[0].insert(key);
        self.filters[1].insert(key);
    }

    pub fn test(&self, key: u64) -> u32 {
        self.active().test(key)
    }

    pub fn clear_and_swap(&mut self, now: Ps) -> Result<()> {
        if now < self.last_clear + self.epoch_len {
            return Err(Error::Invariant(format!(
                "D-CBF swap at {now} ps, epoch ends at {} ps",
                self.next_swap()
            )));
        }
        let seed = self.rng.gen();
        self.filters[self.active].clear_and_reseed(seed);
        self.active = 1 - self.active;
        self.last_clear = now;
        Ok(())
    }

    /// Performs every swap due at or before `now`, each stamped with its own
    /// boundary. Returns how many happened.
    pub fn advance(&mut self, now: Ps) -> u32 {
        let mut n = 0;
        while self.next_swap() <= now {
            let at = self.next_swap();
            self.clear_and_swap(at).expect("boundary reached");
            n += 1;
        }
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn passive_takes_over_with_its_counts() {
        let mut d = DualCbf::new(1024, 8, 100, 5);
        for _ in 0..10 {
            d.insert(7);
        }
        assert!(d.test(7) >= 10);
        d.clear_and_swap(100).unwrap();
        assert!(d.test(7) >= 10, "previously passive filter keeps history");
        assert_eq!(d.passive().test(7), 0);
    }

    #[test]
    fn two_swaps_empty() {
        let mut d = DualCbf::new(256, 8, 10, 1);
        for k in 0..300 {
            d.insert(k);
        }
        assert!(d.clear_and_swap(5).is_err());
        assert_eq!(d.advance(25), 2);
        assert_eq!(d.last_clear(), 20);
        assert!((0..300).all(|k| d.test(k) == 0));
    }

    #[test]
    fn same_seed_same_state() {
        let run = |seed| {
            let mut d = DualCbf::new(512, 6, 50, seed);
            for i in 0..2000u64 {
                d.insert(i * 31 % 777);
                d.advance(i);
            }
            (d.active().counters().to_vec(), d.passive().counters().to_vec())
        };
        assert_eq!(run(11), run(11));
        assert_ne!(run(11), run(12));
    }

    fn alias(f: &CountingBloomFilter, a: u64, b: u64) -> bool {
        f.slots(a).iter().zip(f.slots(b).iter()).any(|(x, y)| x == y)
    }

    #[test]
    fn reseeding_breaks_alias_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let mut d = DualCbf::new(1024, 8, 1, 2);
        let mut pairs = Vec::new();
        while pairs.len() < 2000 {
            let (a, b) = (rng.gen_range(0..1u64 << 20), rng.gen_range(0..1u64 << 20));
            if a != b && alias(d.active(), a, b) {
                pairs.push((a, b));
            }
        }
        d.clear_and_swap(1).unwrap();
        let still = pairs.iter().filter(|&&(a, b)| alias(d.passive(), a, b)).count();
        assert!(still * 100 <= pairs.len(), "{still} of {} still alias", pairs.len());
    }
}
