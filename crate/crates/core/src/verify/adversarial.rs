//! Runs attack pattern families through the live controller and reports the
//! largest per-row activation count the oracle saw in any refresh window.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::blockhammer::{AttackModel, BlockHammer, BlockHammerConfig, BlockHammerMode};
use crate::dram::{BankId, Geometry, TimingParams};
use crate::error::{Error, Result};
use crate::sim::seed::{sub_seed, MITIGATION};
use crate::sim::{
    block_hammer_config, AttackPattern, AttackSpec, BlockHammerParams, GeneratorSpec, MitigationConfig, RunConfig,
    SimConfig, Simulation,
};
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PatternFamily {
    SingleRow,
    DoubleSided,
    ManySided,
    /// Bursts timed to straddle D-CBF epoch boundaries.
    BurstIdle,
    /// Rows that share filter counters with the aggressor.
    AliasProbe,
}

impl PatternFamily {
    pub const ALL: [PatternFamily; 5] = [
        PatternFamily::SingleRow,
        PatternFamily::DoubleSided,
        PatternFamily::ManySided,
        PatternFamily::BurstIdle,
        PatternFamily::AliasProbe,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternResult {
    pub family: PatternFamily,
    pub seed: u64,
    pub max_window_acts: u64,
    pub activations: u64,
    pub blocked_acts: u64,
    pub protocol_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdversarialReport {
    pub mitigation: String,
    /// The bound the mechanism claims, when it claims one.
    pub bound: Option<u64>,
    pub max_window_acts: u64,
    pub results: Vec<PatternResult>,
}

impl AdversarialReport {
    pub fn holds(&self) -> bool {
        self.bound.is_none_or(|b| self.max_window_acts <= b)
    }
}

/// Timing with the refresh window (and so the filter lifetime) shrunk to
/// `t_refw`, everything else at its default.
pub fn scaled_timing(t_refw: Ps) -> TimingParams {
    TimingParams { t_refw, ..TimingParams::default() }
}

/// BlockHammer for the scaled safety experiments: n_rh 64, t_refw 640 µs.
pub fn scaled_block_hammer_config() -> Result<BlockHammerConfig> {
    block_hammer_config(&scaled_params(BlockHammerMode::FullFunctional), &scaled_timing(SCALED_T_REFW))
}

pub const SCALED_T_REFW: Ps = 640_000_000;
pub const SCALED_N_RH: u64 = 64;

fn scaled_params(mode: BlockHammerMode) -> BlockHammerParams {
    BlockHammerParams { n_rh: SCALED_N_RH, mode, attack_model: AttackModel::DoubleSided, t_cbf_ps: None, q_max: None }
}

/// Base config for adversarial runs: the scaled timing, two refresh windows
/// long, verification on.
pub fn scaled_sim_config(mitigation: MitigationConfig, seed: u64) -> SimConfig {
    let mut cfg = SimConfig {
        dram: Default::default(),
        controller: Default::default(),
        mitigation,
        workload: Default::default(),
        sim: RunConfig { duration_ps: 2 * SCALED_T_REFW, seed, verify: true },
        output: Default::default(),
    };
    cfg.dram.timing = scaled_timing(SCALED_T_REFW);
    cfg
}

/// BlockHammer at the scaled configuration in `mode`.
pub fn scaled_block_hammer(mode: BlockHammerMode) -> MitigationConfig {
    MitigationConfig::BlockHammer(scaled_params(mode))
}

/// Builds the attack streams for one family and seed against `cfg`.
pub fn attack_for(family: PatternFamily, cfg: &SimConfig) -> Result<Vec<AttackSpec>> {
    let g = cfg.dram.geometry;
    let t = cfg.dram.timing;
    let seed = cfg.sim.seed;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xadbe_5a17);
    let bank = rng.gen_range(0..g.total_banks());
    let centre = rng.gen_range(16..g.rows_per_bank - 16);
    // Shift the attack against the filter epoch grid.
    let offset = rng.gen_range(0..t.t_refw / 2);
    let base = AttackSpec {
        pattern: AttackPattern::DoubleSided,
        thread: 0,
        bank,
        rows: vec![centre - 1, centre + 1],
        interval_ps: Some(0),
        count: None,
        start_ps: offset,
        max_outstanding: Some(1),
    };
    Ok(match family {
        PatternFamily::SingleRow => vec![AttackSpec { pattern: AttackPattern::SingleRow, rows: vec![centre], ..base }],
        PatternFamily::DoubleSided => vec![base],
        PatternFamily::ManySided => {
            // One thread per aggressor so per-thread quotas do not bind
            // before the per-row delay does.
            (0..8u32)
                .map(|i| AttackSpec {
                    pattern: AttackPattern::ManySided { n: 1 },
                    thread: i,
                    rows: vec![centre - 8 + 2 * i],
                    ..base.clone()
                })
                .collect()
        }
        PatternFamily::BurstIdle => {
            // Bursts of twice the blacklist limit per row, straddling every
            // epoch boundary, so counts carry over into the next filter.
            let epoch = t.t_refw / 2;
            let n_bl = match &cfg.mitigation {
                MitigationConfig::BlockHammer(p) => block_hammer_config(p, &t)?.n_bl,
                _ => SCALED_N_RH / 4,
            };
            let burst = (4 * n_bl) as u32;
            let span = burst as Ps * t.t_rc;
            let shift = offset % span.max(1);
            vec![AttackSpec {
                pattern: AttackPattern::BurstIdle { burst, idle_ps: epoch.saturating_sub(span) },
                interval_ps: Some(t.t_rc),
                start_ps: epoch.saturating_sub(shift),
                max_outstanding: None,
                ..base
            }]
        }
        PatternFamily::AliasProbe => {
            let rows = alias_rows(cfg, BankId(bank), centre, 8)?;
            vec![AttackSpec { pattern: AttackPattern::ManySided { n: rows.len() as u32 }, rows, ..base }]
        }
    })
}

/// `target` plus up to `extra` rows sharing at least one active-filter
/// counter with it, as seen by the run's own BlockHammer instance.
fn alias_rows(cfg: &SimConfig, bank: BankId, target: u32, extra: usize) -> Result<Vec<u32>> {
    let g: Geometry = cfg.dram.geometry;
    let p = match &cfg.mitigation {
        MitigationConfig::BlockHammer(p) => p.clone(),
        _ => scaled_params(BlockHammerMode::FullFunctional),
    };
    let (ch, _, _) = g.split_bank(bank);
    let bh = BlockHammer::new(
        block_hammer_config(&p, &cfg.dram.timing)?,
        g,
        sub_seed(cfg.sim.seed, MITIGATION + ch as u64),
    );
    let filter = bh.filter(bank).active();
    let want = filter.slots(target as u64);
    let mut rows = vec![target];
    for r in (0..g.rows_per_bank).filter(|&r| r != target) {
        if rows.len() > extra {
            break;
        }
        if filter.slots(r as u64).iter().any(|s| want.contains(s)) {
            rows.push(r);
        }
    }
    if rows.len() < 2 {
        return Err(Error::Config("no aliasing rows found".into()));
    }
    Ok(rows)
}

/// Runs every family for every seed through `mitigation` at the scaled
/// configuration. Any protocol violation is an error.
pub fn adversarial_search(
    mitigation: &MitigationConfig,
    families: &[PatternFamily],
    seeds: &[u64],
) -> Result<AdversarialReport> {
    let mut results = Vec::new();
    let mut bound = None;
    for &family in families {
        for &seed in seeds {
            let mut cfg = scaled_sim_config(mitigation.clone(), seed);
            cfg.workload.generators = attack_for(family, &cfg)?.into_iter().map(GeneratorSpec::Attack).collect();
            let report = Simulation::new(cfg)?.run()?.report;
            let v = report.verify.as_ref().expect("verification enabled");
            if v.protocol_violations > 0 {
                return Err(Error::Invariant(format!(
                    "{family:?} seed {seed}: {}",
                    v.first_protocol_violations.join("; ")
                )));
            }
            bound = v.window_bound;
            results.push(PatternResult {
                family,
                seed,
                max_window_acts: v.max_window_acts,
                activations: v.activations,
                blocked_acts: report.controller.blocked_requests,
                protocol_violations: v.protocol_violations,
            });
        }
    }
    Ok(AdversarialReport {
        mitigation: mitigation.name().into(),
        bound,
        max_window_acts: results.iter().map(|r| r.max_window_acts).max().unwrap_or(0),
        results,
    })
}
