use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// H3-class hash: each output bit is the parity of the (rotated) key masked
/// by one row of a random bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct H3Hash {
    seed: u64,
    shift: u32,
    matrix: Vec<u64>,
}

impl H3Hash {
    /// `output_bits` selects a table of 2^output_bits slots. The matrix is
    /// expanded from `seed` with ChaCha8, so equal seeds give equal hashes.
    pub fn new(seed: u64, shift: u32, output_bits: u32) -> Self {
        assert!((1..=32).contains(&output_bits), "H3 output width {output_bits}");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let matrix = (0..output_bits).map(|_| rng.gen::<u64>()).collect();
        H3Hash { seed, shift: shift % 64, matrix }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn output_bits(&self) -> u32 {
        self.matrix.len() as u32
    }

    #[inline]
    pub fn hash(&self, key: u64) -> u32 {
        // Rotation rather than a plain shift keeps the map injective on keys.
        let k = key.rotate_right(self.shift);
        self.matrix
            .iter()
            .enumerate()
            .fold(0u32, |acc, (j, row)| acc | (((k & row).count_ones() & 1) << j))
    }
}
