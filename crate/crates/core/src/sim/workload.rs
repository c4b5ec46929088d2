//! Synthetic request streams: attack patterns and simple benign traffic.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trace::TraceRecord;
use crate::dram::{AddressMapping, BankId, Geometry, TimingParams, WORD_BYTES};
use crate::error::{Error, Result};
use crate::memctrl::RequestKind;
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum AttackPattern {
    /// One aggressor interleaved with a fresh random row each time so that
    /// every access to it needs an ACT.
    SingleRow,
    /// Strict alternation between two rows.
    DoubleSided,
    /// Round robin over `n` rows.
    ManySided { n: u32 },
    /// `burst` round-robin requests, then `idle_ps` of silence, repeated.
    BurstIdle { burst: u32, idle_ps: Ps },
}

fn one_outstanding() -> Option<u32> {
    Some(1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub pattern: AttackPattern,
    #[serde(default)]
    pub thread: u32,
    /// Flat bank id.
    #[serde(default)]
    pub bank: u32,
    pub rows: Vec<u32>,
    /// Request spacing; defaults to t_rc, the fastest a bank can activate.
    #[serde(default)]
    pub interval_ps: Option<Ps>,
    #[serde(default)]
    pub count: Option<u64>,
    #[serde(default)]
    pub start_ps: Ps,
    /// Closed-loop window. One outstanding request makes every access a
    /// row miss, the usual way to hammer without cache flush effects.
    #[serde(default = "one_outstanding")]
    pub max_outstanding: Option<u32>,
}

impl AttackSpec {
    pub fn validate(&self, g: &Geometry) -> Result<()> {
        if self.bank >= g.total_banks() {
            return Err(Error::Config(format!("attack bank {} out of range", self.bank)));
        }
        if let Some(r) = self.rows.iter().find(|&&r| r >= g.rows_per_bank) {
            return Err(Error::Config(format!("attack row {r} out of range")));
        }
        let need = match self.pattern {
            AttackPattern::SingleRow => self.rows.len() == 1,
            AttackPattern::DoubleSided => self.rows.len() == 2 && self.rows[0] != self.rows[1],
            AttackPattern::ManySided { n } => self.rows.len() == n as usize && n >= 1,
            AttackPattern::BurstIdle { burst, .. } => !self.rows.is_empty() && burst >= 1,
        };
        if !need {
            return Err(Error::Config(format!("rows {:?} do not fit pattern {:?}", self.rows, self.pattern)));
        }
        if g.rows_per_bank < 2 {
            return Err(Error::Config("attacks need at least two rows per bank".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    #[serde(default)]
    pub thread: u32,
    pub interval_ps: Ps,
    #[serde(default)]
    pub count: Option<u64>,
    #[serde(default)]
    pub write_fraction: f64,
    #[serde(default)]
    pub max_outstanding: Option<u32>,
    /// Flat bank ids to draw from; all banks when absent.
    #[serde(default)]
    pub banks: Option<Vec<u32>>,
    /// Half-open row range to draw from.
    #[serde(default)]
    pub rows: Option<[u32; 2]>,
    /// Chance of reusing the previous row of the chosen bank.
    #[serde(default)]
    pub row_locality: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StreamSpec {
    #[serde(default)]
    pub thread: u32,
    pub interval_ps: Ps,
    #[serde(default)]
    pub count: Option<u64>,
    #[serde(default)]
    pub start_addr: u64,
    #[serde(default = "default_stride")]
    pub stride: u64,
    #[serde(default)]
    pub write_fraction: f64,
    #[serde(default)]
    pub max_outstanding: Option<u32>,
}

fn default_stride() -> u64 {
    64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GeneratorSpec {
    Attack(AttackSpec),
    Random(RandomSpec),
    Stream(StreamSpec),
}

impl GeneratorSpec {
    pub fn validate(&self, g: &Geometry) -> Result<()> {
        let frac = |f: f64| {
            if (0.0..=1.0).contains(&f) {
                Ok(())
            } else {
                Err(Error::Config(format!("fraction {f} outside [0,1]")))
            }
        };
        match self {
            GeneratorSpec::Attack(a) => a.validate(g),
            GeneratorSpec::Random(r) => {
                frac(r.write_fraction)?;
                frac(r.row_locality)?;
                if r.interval_ps == 0 && r.max_outstanding.is_none() {
                    return Err(Error::Config("open-loop random traffic needs interval_ps > 0".into()));
                }
                if let Some(b) = r.banks.iter().flatten().find(|&&b| b >= g.total_banks()) {
                    return Err(Error::Config(format!("bank {b} out of range")));
                }
                if r.banks.as_ref().is_some_and(Vec::is_empty) {
                    return Err(Error::Config("empty bank list".into()));
                }
                if let Some([lo, hi]) = r.rows {
                    if lo >= hi || hi > g.rows_per_bank {
                        return Err(Error::Config(format!("row range [{lo},{hi}) invalid")));
                    }
                }
                Ok(())
            }
            GeneratorSpec::Stream(s) => {
                frac(s.write_fraction)?;
                if s.stride == 0 || s.stride % WORD_BYTES != 0 {
                    return Err(Error::Config("stride must be a positive multiple of 8".into()));
                }
                Ok(())
            }
        }
    }

    pub fn max_outstanding(&self) -> Option<u32> {
        match self {
            GeneratorSpec::Attack(a) => a.max_outstanding,
            GeneratorSpec::Random(r) => r.max_outstanding,
            GeneratorSpec::Stream(s) => s.max_outstanding,
        }
    }

    /// Lazily generated request stream.
    pub fn stream(
        &self,
        mapping: &AddressMapping,
        t: &TimingParams,
        seed: u64,
    ) -> Result<Box<dyn Iterator<Item = TraceRecord> + Send>> {
        self.validate(mapping.geometry())?;
        Ok(match self {
            GeneratorSpec::Attack(a) => Box::new(gen_attack(a, mapping, t, seed)?),
            GeneratorSpec::Random(r) => Box::new(random_stream(r.clone(), mapping.clone(), seed)),
            GeneratorSpec::Stream(s) => Box::new(sequential_stream(s.clone(), mapping.capacity())),
        })
    }
}

/// Attack request stream; deterministic for a given seed.
pub fn gen_attack(
    spec: &AttackSpec,
    mapping: &AddressMapping,
    t: &TimingParams,
    seed: u64,
) -> Result<impl Iterator<Item = TraceRecord> + Send + use<>> {
    spec.validate(mapping.geometry())?;
    let g = *mapping.geometry();
    let mapping = mapping.clone();
    let spec = spec.clone();
    let interval = spec.interval_ps.unwrap_or(t.t_rc);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bank = BankId(spec.bank);
    let count = spec.count.unwrap_or(u64::MAX);
    Ok((0..count).map(move |i| {
        let (row, arrival) = match spec.pattern {
            AttackPattern::SingleRow => {
                let row = if i % 2 == 0 {
                    spec.rows[0]
                } else {
                    let r = rng.gen_range(0..g.rows_per_bank - 1);
                    if r >= spec.rows[0] { r + 1 } else { r }
                };
                (row, spec.start_ps + i * interval)
            }
            AttackPattern::DoubleSided | AttackPattern::ManySided { .. } => {
                (spec.rows[(i % spec.rows.len() as u64) as usize], spec.start_ps + i * interval)
            }
            AttackPattern::BurstIdle { burst, idle_ps } => {
                let (k, j) = (i / burst as u64, i % burst as u64);
                let period = burst as u64 * interval + idle_ps;
                (spec.rows[(j % spec.rows.len() as u64) as usize], spec.start_ps + k * period + j * interval)
            }
        };
        let col = rng.gen_range(0..g.columns_per_row);
        let addr = mapping.row_address(bank, row, col).expect("validated coordinates");
        TraceRecord { arrival, thread: spec.thread, kind: RequestKind::Read, addr }
    }))
}

fn random_stream(spec: RandomSpec, mapping: AddressMapping, seed: u64) -> impl Iterator<Item = TraceRecord> + Send {
    let g = *mapping.geometry();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let banks: Vec<u32> = spec.banks.clone().unwrap_or_else(|| (0..g.total_banks()).collect());
    let [lo, hi] = spec.rows.unwrap_or([0, g.rows_per_bank]);
    let mut last_row = vec![None::<u32>; g.total_banks() as usize];
    let count = spec.count.unwrap_or(u64::MAX);
    (0..count).map(move |i| {
        let bank = banks[rng.gen_range(0..banks.len())];
        let reuse = rng.gen::<f64>() < spec.row_locality;
        let row = match last_row[bank as usize] {
            Some(r) if reuse => r,
            _ => rng.gen_range(lo..hi),
        };
        last_row[bank as usize] = Some(row);
        let col = rng.gen_range(0..g.columns_per_row);
        let kind = if rng.gen::<f64>() < spec.write_fraction { RequestKind::Write } else { RequestKind::Read };
        let addr = mapping.row_address(BankId(bank), row, col).expect("validated coordinates");
        TraceRecord { arrival: i * spec.interval_ps, thread: spec.thread, kind, addr }
    })
}

fn sequential_stream(spec: StreamSpec, capacity: u64) -> impl Iterator<Item = TraceRecord> + Send {
    let count = spec.count.unwrap_or(u64::MAX);
    let period = if spec.write_fraction > 0.0 { (1.0 / spec.write_fraction).round() as u64 } else { 0 };
    (0..count).map(move |i| {
        let addr = (spec.start_addr + i.wrapping_mul(spec.stride)) % capacity;
        let kind = if period > 0 && i % period == period - 1 { RequestKind::Write } else { RequestKind::Read };
        TraceRecord { arrival: i * spec.interval_ps, thread: spec.thread, kind, addr: addr / WORD_BYTES * WORD_BYTES }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dram::MappingPreset;

    fn mapping() -> AddressMapping {
        AddressMapping::new(Geometry::default(), MappingPreset::RowMajor).unwrap()
    }

    fn spec(pattern: AttackPattern, rows: Vec<u32>) -> AttackSpec {
        AttackSpec {
            pattern,
            thread: 0,
            bank: 2,
            rows,
            interval_ps: None,
            count: Some(12),
            start_ps: 0,
            max_outstanding: Some(1),
        }
    }

    fn rows_of(s: &AttackSpec) -> Vec<u32> {
        let m = mapping();
        gen_attack(s, &m, &TimingParams::default(), 1).unwrap().map(|r| m.decode(r.addr).unwrap().row).collect()
    }

    #[test]
    fn double_sided_alternates() {
        let rows = rows_of(&spec(AttackPattern::DoubleSided, vec![10, 12]));
        assert!(rows.chunks(2).all(|c| c == [10, 12]));
    }

    #[test]
    fn many_sided_round_robin() {
        let rows = rows_of(&spec(AttackPattern::ManySided { n: 3 }, vec![1, 3, 5]));
        assert_eq!(&rows[..6], &[1, 3, 5, 1, 3, 5]);
    }

    #[test]
    fn burst_idle_timing() {
        let s = spec(AttackPattern::BurstIdle { burst: 4, idle_ps: 1_000_000 }, vec![7, 9]);
        let m = mapping();
        let recs: Vec<_> = gen_attack(&s, &m, &TimingParams::default(), 1).unwrap().collect();
        assert_eq!(recs[4].arrival - recs[3].arrival, 46_250 + 1_000_000);
        assert_eq!(recs[1].arrival, 46_250);
    }

    #[test]
    fn pattern_row_count_checked() {
        let s = spec(AttackPattern::ManySided { n: 3 }, vec![1, 3]);
        assert!(s.validate(&Geometry::default()).is_err());
    }
}
