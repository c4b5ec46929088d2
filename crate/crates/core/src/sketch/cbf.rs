use super::h3::H3Hash;

pub const HASHES_PER_FILTER: usize = 4;

/// Counter width that lets a counter reach `n_bl` without saturating
/// below it: ceil(log2 n_bl) + 1.
pub fn counter_width_for(n_bl: u64) -> u32 {
    let bits = 64 - n_bl.saturating_sub(1).leading_zeros();
    bits + 1
}

/// Saturating counting Bloom filter with four H3 hashes. `test` returns the
/// minimum of the mapped counters, so it never under-reports.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CountingBloomFilter {
    counters: Vec<u32>,
    max: u32,
    width: u32,
    hashes: Vec<H3Hash>,
}

impl CountingBloomFilter {
    /// `size` must be a power of two.
    pub fn new(size: usize, width: u32, seed: u64) -> Self {
        assert!(size.is_power_of_two() && size >= 2, "CBF size {size}");
        assert!((1..=32).contains(&width), "counter width {width}");
        CountingBloomFilter {
            counters: vec![0; size],
            max: if width == 32 { u32::MAX } else { (1u32 << width) - 1 },
            width,
            hashes: Self::hashes(size, seed),
        }
    }

    fn hashes(size: usize, seed: u64) -> Vec<H3Hash> {
        let bits = size.trailing_zeros();
        (0..HASHES_PER_FILTER as u64)
            .map(|i| {
                let s = seed.wrapping_add(i.wrapping_mul(0x9E37_79B9_7F4A_7C15));
                H3Hash::new(s, (i as u32) * 7, bits)
            })
            .collect()
    }

    pub fn size(&self) -> usize {
        self.counters.len()
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn counter_max(&self) -> u32 {
        self.max
    }

    pub fn slots(&self, key: u64) -> [u32; HASHES_PER_FILTER] {
        let mut s = [0; HASHES_PER_FILTER];
        for (slot, h) in s.iter_mut().zip(&self.hashes) {
            *slot = h.hash(key);
        }
        s
    }

    pub fn insert(&mut self, key: u64) {
        for s in self.slots(key) {
            let c = &mut self.counters[s as usize];
            if *c < self.max {
                *c += 1;
            }
        }
    }

    pub fn test(&self, key: u64) -> u32 {
        self.slots(key)
            .iter()
            .map(|&s| self.counters[s as usize])
            .min()
            .unwrap_or(0)
    }

    /// Zeroes every counter and installs hashes derived from `seed`.
    pub fn clear_and_reseed(&mut self, seed: u64) {
        self.counters.iter_mut().for_each(|c| *c = 0);
        self.hashes = Self::hashes(self.counters.len(), seed);
    }

    pub fn counters(&self) -> &[u32] {
        &self.counters
    }
}
