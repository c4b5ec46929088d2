//! Hashing and counting Bloom filters used for row blacklisting.

mod cbf;
mod dcbf;
mod h3;

pub use cbf::{counter_width_for, CountingBloomFilter, HASHES_PER_FILTER};
pub use dcbf::DualCbf;
pub use h3::H3Hash;
