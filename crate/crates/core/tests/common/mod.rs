//! Oracles shared by the integration and acceptance targets.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use std::collections::HashMap;

use disturbsim::para::{neighbour_pick, ParaRuntime};
use disturbsim::sketch::DualCbf;

pub const T_RC: u64 = 46_250;

/// Worst-case adversary as a recursion over the remaining activation budget
/// `b`: either the next n_rh − hc_deadline hammers all survive (possible
/// only while the budget covers n_rh + hc_deadline), or the first hammer is
/// followed by a refresh, spending two activations and starting over.
pub fn para_dp(n_rh: u64, hc_deadline: u64, window: u64, p_th: f64) -> f64 {
    let q = 1.0 - p_th / 2.0;
    let r = p_th / 2.0;
    let need = n_rh + hc_deadline;
    let survive = q.powi((n_rh - hc_deadline) as i32);
    let mut v = vec![0.0f64; window as usize + 1];
    for b in 0..=window as usize {
        let here = if b as u64 >= need { survive } else { 0.0 };
        let retry = if b >= 2 { q * r * v[b - 2] } else { 0.0 };
        v[b] = here + retry;
    }
    v[window as usize]
}

const PREC_BITS: u64 = 200;

/// Binary float with a 200-bit mantissa: value = m · 2^e.
#[derive(Clone)]
struct BigFloat {
    m: BigInt,
    e: i64,
}

impl BigFloat {
    fn from_f64(x: f64) -> Self {
        // Exact: every finite f64 is a dyadic rational.
        let (mant, exp, sign) = num_traits::Float::integer_decode(x);
        BigFloat { m: BigInt::from(mant) * sign, e: exp as i64 }.norm()
    }

    fn one() -> Self {
        BigFloat { m: BigInt::one(), e: 0 }.norm()
    }

    fn norm(mut self) -> Self {
        let bits = self.m.bits();
        if bits > PREC_BITS {
            let drop = bits - PREC_BITS;
            self.m >>= drop as usize;
            self.e += drop as i64;
        } else if bits > 0 {
            let add = PREC_BITS - bits;
            self.m <<= add as usize;
            self.e -= add as i64;
        }
        self
    }

    fn mul(&self, o: &Self) -> Self {
        BigFloat { m: &self.m * &o.m, e: self.e + o.e }.norm()
    }

    fn add(&self, o: &Self) -> Self {
        if self.m.is_zero() {
            return o.clone();
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let m = (&hi.m << (hi.e - lo.e) as usize) + &lo.m;
        BigFloat { m, e: lo.e }.norm()
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&BigFloat { m: -o.m.clone(), e: o.e })
    }

    fn log2(&self) -> f64 {
        let bits = self.m.bits() as i64;
        let top = (&self.m >> (bits - 60).max(0) as usize).to_f64().unwrap();
        top.log2() + (self.e + (bits - 60).max(0)) as f64
    }
}

/// p_rh with 200-bit mantissas, summing terms until they fall below the
/// working precision relative to the sum.
pub fn para_bigint(n_rh: u64, hc_deadline: u64, nf_max: u64, p_th: f64) -> f64 {
    para_bigint_log2(n_rh, hc_deadline, nf_max, p_th).exp2()
}

/// log2 of [`para_bigint`], usable where the value underflows f64.
pub fn para_bigint_log2(n_rh: u64, hc_deadline: u64, nf_max: u64, p_th: f64) -> f64 {
    let r = BigFloat::from_f64(p_th / 2.0);
    let q = BigFloat::one().sub(&r);
    let mut base = BigFloat::one();
    let mut pw = q.clone();
    let mut e = n_rh - hc_deadline;
    while e > 0 {
        if e & 1 == 1 {
            base = base.mul(&pw);
        }
        pw = pw.mul(&pw);
        e >>= 1;
    }
    let x = q.mul(&r);
    let mut sum = BigFloat { m: BigInt::zero(), e: 0 };
    let mut term = base;
    for _ in 0..=nf_max {
        sum = sum.add(&term);
        term = term.mul(&x);
        if sum.log2() - term.log2() > PREC_BITS as f64 + 8.0 {
            break;
        }
    }
    sum.log2()
}

/// Outcome of a Monte-Carlo run.
#[derive(Debug, Clone, Copy)]
pub struct McResult {
    pub trials: u64,
    pub successes: u64,
}

impl McResult {
    pub fn frequency(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// One-sided 99% lower confidence bound on the success probability
    /// (normal approximation; the counts here are in the thousands).
    pub fn lower_99(&self) -> f64 {
        let n = self.trials as f64;
        let p = self.frequency();
        p - 2.326_347_874 * (p * (1.0 - p) / n).sqrt()
    }
}

/// Continuous hammering of one aggressor through the PARA runtime. Each
/// hammer is an activation; every preventive refresh it triggers costs one
/// more. A trial succeeds when the victim sees n_rh − hc_deadline hammers
/// since its last refresh before the budget of `window` activations runs
/// out (hc_deadline extra hammers land while the refresh is queued).
pub fn para_mc_hammer(n_rh: u64, hc_deadline: u64, window: u64, p_th: f64, trials: u64, seed: u64) -> McResult {
    let (aggressor, victim, rows) = (100u32, 101u32, 1024u32);
    let mut para = ParaRuntime::new(p_th, rows, seed);
    let mut successes = 0;
    for _ in 0..trials {
        let (mut spent, mut hc) = (0u64, 0u64);
        while spent < window {
            spent += 1;
            hc += 1;
            if hc + hc_deadline >= n_rh {
                successes += 1;
                break;
            }
            if let Some(v) = para.on_close(aggressor) {
                spent += 1;
                if v == victim {
                    hc = 0;
                }
            }
        }
    }
    McResult { trials, successes }
}

/// Samples the exact outcome pattern the analytic bound sums over: some
/// number of (hammer, refresh) failures followed by n_rh − hc_deadline
/// clean hammers, all inside the budget.
pub fn para_mc_modelled(n_rh: u64, hc_deadline: u64, window: u64, p_th: f64, trials: u64, seed: u64) -> McResult {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let need = n_rh - hc_deadline;
    let mut successes = 0;
    'trial: for _ in 0..trials {
        let mut budget = window;
        loop {
            if budget < n_rh + hc_deadline {
                continue 'trial;
            }
            // First hammer of an attempt.
            if neighbour_pick(100, 1024, p_th, rng.gen()) == Some(101) {
                continue 'trial;
            }
            if need == 1 {
                successes += 1;
                continue 'trial;
            }
            // Second draw decides between a failure at hc 1 and going on.
            if neighbour_pick(100, 1024, p_th, rng.gen()) == Some(101) {
                budget -= 2;
                continue;
            }
            let clean = (2..need).all(|_| neighbour_pick(100, 1024, p_th, rng.gen()) != Some(101));
            successes += clean as u64;
            continue 'trial;
        }
    }
    McResult { trials, successes }
}

use disturbsim::sim::{AttackPattern, AttackSpec, GeneratorSpec, MitigationConfig, RandomSpec, RunConfig, SimConfig};

/// Default DRAM with `t_refw` shrunk, `duration` long, verification on.
pub fn sim_config(mitigation: MitigationConfig, t_refw: u64, duration: u64, seed: u64) -> SimConfig {
    let mut cfg = SimConfig {
        dram: Default::default(),
        controller: Default::default(),
        mitigation,
        workload: Default::default(),
        sim: RunConfig { duration_ps: duration, seed, verify: true },
        output: Default::default(),
    };
    cfg.dram.timing.t_refw = t_refw;
    cfg
}

pub fn double_sided(thread: u32, bank: u32, centre: u32) -> GeneratorSpec {
    GeneratorSpec::Attack(AttackSpec {
        pattern: AttackPattern::DoubleSided,
        thread,
        bank,
        rows: vec![centre - 1, centre + 1],
        interval_ps: Some(0),
        count: None,
        start_ps: 0,
        max_outstanding: Some(1),
    })
}

pub fn random(thread: u32, interval_ps: u64, max_outstanding: u32, row_locality: f64) -> GeneratorSpec {
    GeneratorSpec::Random(RandomSpec {
        thread,
        interval_ps,
        count: None,
        write_fraction: 0.3,
        max_outstanding: Some(max_outstanding),
        banks: None,
        rows: None,
        row_locality,
    })
}

use std::sync::Arc;

use disturbsim::dram::{BankId, Geometry, TimingParams};
use disturbsim::para::{solve_pth, ParaSolverInput};
use disturbsim::sim::{HiraParams, PreventiveConfig};
use disturbsim::svard::{ProfileSpec, SvardConfig, SvardPara, VulnerabilityProfile};

/// Preventive refreshes of Svärd-PARA and plain PARA at the weakest
/// HC_first over the same `acts` random row closures, plus both p_th values
/// for the weakest bin.
pub struct SvardComparison {
    pub svard: u64,
    pub plain: u64,
    pub svard_weakest_pth: f64,
    pub plain_pth: f64,
}

pub fn svard_vs_para(h: u64, acts: u64, seed: u64) -> SvardComparison {
    let g = Geometry::default();
    let t = TimingParams::default();
    let base = ParaSolverInput::new(h, t.t_refw, t.t_rc, 0);
    let profile = VulnerabilityProfile::generate(&ProfileSpec::two_bin(0.05, h, 2), g.total_rows(), seed).unwrap();
    let mut svard = SvardPara::new(Arc::new(profile), SvardConfig::default(), g, base, seed).unwrap();
    let plain_pth = solve_pth(&base).unwrap();
    let mut plain = ParaRuntime::new(plain_pth, g.rows_per_bank, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xac75);
    for _ in 0..acts {
        let bank = BankId(rng.gen_range(0..g.total_banks()));
        let row = rng.gen_range(0..g.rows_per_bank);
        svard.on_close(bank, row);
        plain.on_close(row);
    }
    SvardComparison {
        svard: svard.preventive_count(),
        plain: plain.preventive_count(),
        svard_weakest_pth: svard.bin_pth()[0],
        plain_pth,
    }
}

pub const HIRA_T_REFW: u64 = 4_000_000_000;

/// Scaled HiRA setup: 2048 rows per bank in 16 subarrays, t_refw 4 ms,
/// three windows long.
pub fn hira_config(mitigation: MitigationConfig, generators: Vec<GeneratorSpec>, seed: u64) -> SimConfig {
    let mut cfg = sim_config(mitigation, HIRA_T_REFW, 3 * HIRA_T_REFW, seed);
    cfg.dram.geometry.rows_per_bank = 2048;
    cfg.dram.geometry.subarrays_per_bank = 16;
    cfg.workload.generators = generators;
    cfg
}

pub fn hira(slack_trc: u32, preventive: Option<PreventiveConfig>) -> MitigationConfig {
    MitigationConfig::HiraMc(HiraParams { slack_trc, spt_coverage: 0.32, spt_path: None, preventive })
}

/// Two closed-loop random threads with little row locality.
pub fn memory_intensive() -> Vec<GeneratorSpec> {
    vec![random(0, 0, 32, 0.2), random(1, 0, 32, 0.2)]
}

/// Runs one randomized D-CBF stream and returns the number of under-counts
/// against exact counts since the active filter was last cleared.
pub fn dcbf_undercounts_stream(seed: u64, ops: usize) -> u64 {
    let epoch = 10_000u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut d = DualCbf::new(512, 10, epoch, seed ^ 0x5eed);
    // Inserts stamped with time, to recount exactly.
    let mut log: HashMap<u64, Vec<u64>> = HashMap::new();
    let hot: Vec<u64> = (0..8).map(|_| rng.gen()).collect();
    let mut now = 0u64;
    let mut under = 0;
    for _ in 0..ops {
        now += rng.gen_range(0..40);
        d.advance(now);
        let key = if rng.gen_bool(0.5) { hot[rng.gen_range(0..hot.len())] } else { rng.gen_range(0..20_000) };
        if rng.gen_bool(0.8) {
            d.insert(key);
            log.entry(key).or_default().push(now);
        } else {
            // The active filter has seen every insert since its clear one
            // epoch before the last swap.
            let since = d.last_clear().saturating_sub(epoch);
            let since = if d.last_clear() == 0 { 0 } else { since };
            let exact = log.get(&key).map_or(0, |v| v.iter().filter(|&&t| t >= since).count()) as u32;
            if d.test(key) < exact.min(d.active().counter_max()) {
                under += 1;
            }
        }
    }
    under
}
