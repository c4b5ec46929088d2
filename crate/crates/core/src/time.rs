//! Integer picosecond time base.

/// Simulated time and durations, in picoseconds.
pub type Ps = u64;

pub const PS_PER_NS: Ps = 1_000;
pub const PS_PER_US: Ps = 1_000_000;
pub const PS_PER_MS: Ps = 1_000_000_000;

/// Command-bus slot of a DDR4 command clock at 400 MHz.
pub const COMMAND_SLOT: Ps = 2_500;

pub const fn ns(v: u64) -> Ps {
    v * PS_PER_NS
}

pub const fn us(v: u64) -> Ps {
    v * PS_PER_US
}

pub const fn ms(v: u64) -> Ps {
    v * PS_PER_MS
}

/// Converts picoseconds to (fractional) nanoseconds for reporting.
pub fn to_ns(v: Ps) -> f64 {
    v as f64 / PS_PER_NS as f64
}

/// Rounds `t` up to the next multiple of `slot`.
pub fn align_up(t: Ps, slot: Ps) -> Ps {
    t.div_ceil(slot) * slot
}
