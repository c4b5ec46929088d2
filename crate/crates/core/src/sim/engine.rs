use std::collections::BTreeMap;
use std::sync::Arc;

use super::config::{MitigationConfig, PreventiveConfig, ProfileSource, SimConfig, SvardParams};
use super::report::{rhli_entries, thread_report, StatsReport, VerifyReport};
use super::seed::{sub_seed, MITIGATION, PREVENTIVE, PROFILE, SPT, WORKLOAD};
use super::trace::{TraceReader, TraceRecord};
use crate::blockhammer::{derive_config, BlockHammer, BlockHammerConfig, BlockHammerMode};
use crate::dram::{AddressMapping, BankId, CommandKind, Geometry, IssuedCommand, ReplayValidator, TimingParams};
use crate::error::{Error, Result};
use crate::hira::{build_spt, HiraMc, HiraStats, Preventive, SubarrayPairsTable};
use crate::memctrl::{ActSafety, Controller, MemoryRequest, Mitigation, RefreshMode, TickOutput};
use crate::para::{ParaRuntime, ParaSolverInput};
use crate::svard::{SvardConfig, SvardPara, VulnerabilityProfile};
use crate::time::{align_up, Ps, COMMAND_SLOT};
use crate::verify::{CoverageRule, RefreshCoverage, WindowOracle};

/// A request waiting in the queue longer than this many refresh windows
/// means the scheduler starved it.
const STARVATION_WINDOWS: u64 = 10;

/// The mitigation plugged into every channel's controller.
#[derive(Debug)]
pub enum AnyMitigation {
    None,
    Para(ParaRuntime),
    BlockHammer(Box<BlockHammer>),
    Svard(Box<SvardPara>),
}

macro_rules! delegate {
    ($self:ident, $m:ident => $e:expr, $default:expr) => {
        match $self {
            AnyMitigation::None => $default,
            AnyMitigation::Para($m) => $e,
            AnyMitigation::BlockHammer($m) => $e,
            AnyMitigation::Svard($m) => $e,
        }
    };
}

impl Mitigation for AnyMitigation {
    fn advance(&mut self, now: Ps) -> Result<()> {
        delegate!(self, m => m.advance(now), Ok(()))
    }

    fn next_event(&self, now: Ps) -> Option<Ps> {
        delegate!(self, m => m.next_event(now), None)
    }

    fn is_act_safe(&self, bank: BankId, row: u32, now: Ps) -> ActSafety {
        delegate!(self, m => m.is_act_safe(bank, row, now), ActSafety::Safe)
    }

    fn quota(&self, thread: u32, bank: BankId) -> Option<u32> {
        delegate!(self, m => m.quota(thread, bank), None)
    }

    fn on_act(&mut self, bank: BankId, row: u32, thread: Option<u32>, now: Ps) -> Result<()> {
        delegate!(self, m => m.on_act(bank, row, thread, now), Ok(()))
    }

    fn on_close(&mut self, bank: BankId, row: u32, now: Ps) -> Option<u32> {
        // Inherent on_close methods shadow the trait one, so spell it out.
        match self {
            AnyMitigation::None => None,
            AnyMitigation::Para(m) => Mitigation::on_close(m, bank, row, now),
            AnyMitigation::BlockHammer(m) => Mitigation::on_close(m.as_mut(), bank, row, now),
            AnyMitigation::Svard(m) => Mitigation::on_close(m.as_mut(), bank, row, now),
        }
    }

    fn rhli_snapshot(&self) -> Vec<(u32, u32, f64)> {
        delegate!(self, m => m.rhli_snapshot(), Vec::new())
    }
}

impl AnyMitigation {
    fn preventive_count(&self) -> u64 {
        match self {
            AnyMitigation::Para(p) => p.preventive_count(),
            AnyMitigation::Svard(s) => s.preventive_count(),
            _ => 0,
        }
    }

    pub fn block_hammer(&self) -> Option<&BlockHammer> {
        match self {
            AnyMitigation::BlockHammer(b) => Some(b),
            _ => None,
        }
    }
}

type RecordStream = Box<dyn Iterator<Item = Result<TraceRecord>> + Send>;

struct Source {
    records: RecordStream,
    head: Option<TraceRecord>,
    head_offered: bool,
    max_outstanding: Option<u32>,
    outstanding: u32,
    /// Closed-loop sources issue no earlier than the completion that freed
    /// their slot.
    eligible_since: Ps,
    /// Set after a rejection; retried after the target channel ticks.
    retry_at: Option<Ps>,
    blocked_channel: u32,
}

impl Source {
    fn pull(&mut self) -> Result<()> {
        self.head = self.records.next().transpose()?;
        self.head_offered = false;
        Ok(())
    }

    fn ready_at(&self) -> Option<Ps> {
        let head = self.head.as_ref()?;
        if self.max_outstanding.is_some_and(|m| self.outstanding >= m) {
            return None;
        }
        let at = head.arrival.max(self.eligible_since);
        Some(self.retry_at.map_or(at, |r| at.max(r)))
    }
}

#[derive(Debug, Default)]
struct ThreadAcc {
    offered: u64,
    attempts_rejected: u64,
    latencies: Vec<Ps>,
    in_flight: u64,
}

struct Verifier {
    validator: ReplayValidator,
    oracle: WindowOracle,
    coverage: Option<RefreshCoverage>,
    second_act: Ps,
    window_bound: Option<u64>,
}

/// Everything a finished run produced.
#[derive(Debug)]
pub struct RunOutput {
    pub report: StatsReport,
    /// Issued commands in issue order, when capture was requested.
    pub commands: Vec<IssuedCommand>,
}

pub struct Simulation {
    cfg: SimConfig,
    mapping: AddressMapping,
    channels: Vec<Controller<AnyMitigation>>,
    sources: Vec<Source>,
    capture: bool,
}

impl Simulation {
    /// Builds controllers and workload sources from `cfg`.
    pub fn new(cfg: SimConfig) -> Result<Self> {
        cfg.validate()?;
        let g = cfg.dram.geometry;
        let mapping = AddressMapping::new(g, cfg.dram.mapping)?;
        let channels = build_channels(&cfg)?;
        let mut sim = Simulation { mapping, channels, sources: Vec::new(), capture: false, cfg };
        for path in sim.cfg.workload.traces.clone() {
            sim.add_source(Box::new(TraceReader::open(&path)?), None)?;
        }
        for (i, spec) in sim.cfg.workload.generators.clone().iter().enumerate() {
            let seed = sub_seed(sim.cfg.sim.seed, WORKLOAD + i as u64);
            let stream = spec.stream(&sim.mapping, &sim.cfg.dram.timing, seed)?;
            sim.add_source(Box::new(stream.map(Ok)), spec.max_outstanding())?;
        }
        Ok(sim)
    }

    /// Adds a request source; `max_outstanding` makes it closed-loop.
    pub fn add_source(&mut self, records: RecordStream, max_outstanding: Option<u32>) -> Result<()> {
        if self.sources.len() >= 1 << 16 {
            return Err(Error::Config("too many request sources".into()));
        }
        let mut s = Source {
            records,
            head: None,
            head_offered: false,
            max_outstanding,
            outstanding: 0,
            eligible_since: 0,
            retry_at: None,
            blocked_channel: 0,
        };
        s.pull()?;
        self.sources.push(s);
        Ok(())
    }

    /// Keeps every issued command for `RunOutput::commands`.
    pub fn capture_commands(&mut self, on: bool) {
        self.capture = on;
    }

    pub fn mapping(&self) -> &AddressMapping {
        &self.mapping
    }

    pub fn run(mut self) -> Result<RunOutput> {
        let cfg = self.cfg.clone();
        let g = cfg.dram.geometry;
        let t = cfg.dram.timing;
        let duration = cfg.sim.duration_ps;
        let mut verifier = cfg.sim.verify.then(|| self.verifier());
        let mut threads: BTreeMap<u32, ThreadAcc> = BTreeMap::new();
        let mut commands = Vec::new();
        let mut wakes = vec![0; self.channels.len()];
        let mut seq = 0u64;
        let mut out = TickOutput::default();
        let mut now = 0;

        while now < duration {
            // Offer every source's ready requests.
            for (si, s) in self.sources.iter_mut().enumerate() {
                while let Some(at) = s.ready_at() {
                    if at > now {
                        break;
                    }
                    let rec = s.head.expect("ready source has a head");
                    let addr = self.mapping.decode(rec.addr)?;
                    let acc = threads.entry(rec.thread).or_default();
                    if !s.head_offered {
                        acc.offered += 1;
                        s.head_offered = true;
                    }
                    let req = MemoryRequest {
                        id: (seq << 16) | si as u64,
                        arrival: rec.arrival.max(s.eligible_since),
                        thread: rec.thread,
                        kind: rec.kind,
                        addr,
                        completion: None,
                    };
                    let ch = addr.channel as usize;
                    if self.channels[ch].enqueue(req) {
                        seq += 1;
                        acc.in_flight += 1;
                        s.outstanding += 1;
                        s.retry_at = None;
                        wakes[ch] = wakes[ch].min(now);
                        s.pull()?;
                    } else {
                        acc.attempts_rejected += 1;
                        s.retry_at = Some(Ps::MAX);
                        s.blocked_channel = ch as u32;
                        break;
                    }
                }
            }

            for (ch, c) in self.channels.iter_mut().enumerate() {
                if wakes[ch] > now {
                    continue;
                }
                c.tick(now, &mut out)?;
                wakes[ch] = out.wake;
                for s in self.sources.iter_mut() {
                    if s.retry_at == Some(Ps::MAX) && s.blocked_channel == ch as u32 {
                        s.retry_at = Some(now + COMMAND_SLOT);
                    }
                }
                for done in &out.completed {
                    let r = &done.request;
                    let s = &mut self.sources[(r.id & 0xffff) as usize];
                    s.outstanding -= 1;
                    let fin = r.completion.expect("completed request has a time");
                    s.eligible_since = s.eligible_since.max(fin);
                    let acc = threads.entry(r.thread).or_default();
                    acc.in_flight -= 1;
                    acc.latencies.push(fin - r.arrival);
                }
                if let Some(cmd) = out.issued {
                    if let Some(v) = verifier.as_mut() {
                        v.command(&g, &cmd);
                    }
                    if self.capture {
                        commands.push(cmd);
                    }
                }
                if let Some(v) = verifier.as_mut() {
                    if let Some(cov) = v.coverage.as_mut() {
                        for r in out.refreshed.iter().filter(|r| r.periodic) {
                            cov.refreshed(r.bank, r.first, r.end, r.at);
                        }
                    }
                }
                if let Some(oldest) = c.oldest_arrival() {
                    if now.saturating_sub(oldest) > STARVATION_WINDOWS * t.t_refw {
                        return Err(Error::Invariant(format!(
                            "channel {ch}: request from {oldest} ps still queued at {now} ps"
                        )));
                    }
                }
            }

            let mut next = wakes.iter().copied().min().unwrap_or(Ps::MAX);
            for s in &self.sources {
                if let Some(at) = s.ready_at() {
                    next = next.min(at);
                }
            }
            if next == Ps::MAX {
                break;
            }
            now = align_up(next.max(now + 1), COMMAND_SLOT);
        }

        let end = duration;
        let mut report = StatsReport {
            mitigation: cfg.mitigation.name().into(),
            seed: cfg.sim.seed,
            duration_ps: duration,
            ..StatsReport::default()
        };
        // Offered but never accepted by the end.
        let mut rejected_final: BTreeMap<u32, u64> = BTreeMap::new();
        for s in &self.sources {
            if let (Some(h), true) = (s.head, s.head_offered) {
                *rejected_final.entry(h.thread).or_default() += 1;
            }
        }
        for (id, acc) in threads {
            let mut tr = thread_report(id, acc.latencies);
            tr.offered = acc.offered;
            tr.in_flight = acc.in_flight;
            tr.rejected_attempts = acc.attempts_rejected;
            tr.rejected_final = rejected_final.get(&id).copied().unwrap_or(0);
            report.threads.push(tr);
        }

        let mut hira: Option<HiraStats> = None;
        let mut rhli = Vec::new();
        for c in &self.channels {
            report.controller.merge(c.stats());
            report.preventive_refreshes += c.mitigation().preventive_count();
            rhli.extend(c.mitigation().rhli_snapshot());
            if let RefreshMode::Hira(h) = c.refresh_mode() {
                let overdue = h.overdue(end) as u64;
                report.refresh_deadline_violations += h.stats().deadline_violations + overdue;
                report.preventive_refreshes += h.preventive().map_or(0, Preventive::preventive_count);
                merge_hira(hira.get_or_insert_with(HiraStats::default), h.stats());
            }
        }
        report.hira = hira;
        report.rhli = rhli_entries(rhli);

        if let Some(v) = verifier {
            let window_bound = v.window_bound;
            let max = v.oracle.max();
            let commands_checked = v.validator.commands_checked();
            let violations = v.validator.finish();
            report.verify = Some(VerifyReport {
                commands_checked,
                protocol_violations: violations.len() as u64,
                first_protocol_violations: violations.into_iter().take(10).collect(),
                activations: v.oracle.total(),
                max_window_acts: max,
                max_window_row: v.oracle.max_row().map(|r| {
                    let per_bank = g.rows_per_bank as u64;
                    ((r / per_bank) as u32, (r % per_bank) as u32)
                }),
                coverage: v.coverage.map(|c| c.finish(end)).unwrap_or_default(),
                window_bound,
                window_bound_exceeded: window_bound.is_some_and(|b| max > b),
            });
        }
        Ok(RunOutput { report, commands })
    }

    fn verifier(&self) -> Verifier {
        let g = self.cfg.dram.geometry;
        let t = self.cfg.dram.timing;
        let h = self.cfg.dram.hira;
        let all: Vec<BankId> = (0..g.total_banks()).map(BankId).collect();
        let coverage = match self.channels.first().map(|c| c.refresh_mode()) {
            Some(RefreshMode::Baseline) => Some(RefreshCoverage::new(&g, all, t.t_refw, CoverageRule::Interval)),
            Some(RefreshMode::Hira(_)) => Some(RefreshCoverage::new(&g, all, t.t_refw, CoverageRule::AlignedWindow)),
            _ => None,
        };
        let window_bound = self.channels.first().and_then(|c| {
            let b = c.mitigation().block_hammer()?;
            (b.config().mode == BlockHammerMode::FullFunctional).then_some(b.config().n_rh_star)
        });
        Verifier {
            validator: ReplayValidator::new(g, t, h),
            oracle: WindowOracle::new(t.t_refw),
            coverage,
            second_act: h.second_act_offset(),
            window_bound,
        }
    }
}

impl Verifier {
    fn command(&mut self, g: &Geometry, cmd: &IssuedCommand) {
        self.validator.push(cmd);
        match cmd.kind {
            CommandKind::Act { row, .. } => self.oracle.push(g.global_row(cmd.bank, row), cmd.at),
            CommandKind::Hira { first, second, .. } => {
                self.oracle.push(g.global_row(cmd.bank, first), cmd.at);
                self.oracle.push(g.global_row(cmd.bank, second), cmd.at + self.second_act);
            }
            _ => {}
        }
    }
}

fn merge_hira(into: &mut HiraStats, s: &HiraStats) {
    into.periodic_generated += s.periodic_generated;
    into.preventive_generated += s.preventive_generated;
    into.performed += s.performed;
    into.deadline_violations += s.deadline_violations;
    into.max_lateness_ps = into.max_lateness_ps.max(s.max_lateness_ps);
    for (k, v) in &s.ops {
        *into.ops.entry(*k).or_default() += v;
    }
    into.forced += s.forced;
    into.pr_fifo_peak = into.pr_fifo_peak.max(s.pr_fifo_peak);
    into.table_peak = into.table_peak.max(s.table_peak);
}

/// BlockHammer configuration for a run, honouring an explicit t_cbf.
pub fn block_hammer_config(p: &super::config::BlockHammerParams, t: &TimingParams) -> Result<BlockHammerConfig> {
    let base = derive_config(p.n_rh, p.attack_model.clone(), t)?;
    let mut cfg = match p.t_cbf_ps {
        Some(t_cbf) => BlockHammerConfig::from_parts(
            base.n_rh,
            base.n_rh_star,
            base.n_bl,
            base.cbf_size,
            t_cbf,
            t,
            base.attack_model.clone(),
        )?,
        None => base,
    };
    cfg.mode = p.mode;
    if let Some(q) = p.q_max {
        cfg.q_max = q;
    }
    Ok(cfg)
}

/// Loads or generates the vulnerability profile a Svärd config points at.
pub fn load_profile(src: &ProfileSource, g: &Geometry, seed: u64) -> Result<VulnerabilityProfile> {
    let p = match (&src.path, &src.spec) {
        (Some(path), None) => VulnerabilityProfile::load(path, Some(g.total_rows()))?,
        (None, Some(spec)) => VulnerabilityProfile::generate(spec, g.total_rows(), sub_seed(seed, PROFILE))?,
        _ => return Err(Error::Config("profile needs exactly one of path or spec".into())),
    };
    match src.scale_to {
        Some(h) => p.scaled_to(h),
        None => Ok(p),
    }
}

fn svard(s: &SvardParams, cfg: &SimConfig, profile: &Arc<VulnerabilityProfile>, deadline: u64, seed: u64) -> Result<SvardPara> {
    let t = &cfg.dram.timing;
    let base = ParaSolverInput {
        target_prh: s.target_prh,
        ..ParaSolverInput::new(profile.min_hcfirst(), t.t_refw, t.t_rc, s.hc_deadline.unwrap_or(deadline))
    };
    let sc = SvardConfig { enabled: s.enabled, lookup_scope: s.lookup_scope, r_blast: s.r_blast };
    SvardPara::new(profile.clone(), sc, cfg.dram.geometry, base, seed)
}

fn build_channels(cfg: &SimConfig) -> Result<Vec<Controller<AnyMitigation>>> {
    let g = cfg.dram.geometry;
    let t = cfg.dram.timing;
    let h = cfg.dram.hira;
    let seed = cfg.sim.seed;
    let profile = match &cfg.mitigation {
        MitigationConfig::SvardPara(s) => Some(Arc::new(load_profile(&s.profile, &g, seed)?)),
        MitigationConfig::HiraMc(hp) => match &hp.preventive {
            Some(PreventiveConfig::SvardPara(s)) => Some(Arc::new(load_profile(&s.profile, &g, seed)?)),
            _ => None,
        },
        _ => None,
    };
    let spt = match &cfg.mitigation {
        MitigationConfig::HiraMc(hp) => Some(match &hp.spt_path {
            Some(p) => SubarrayPairsTable::load(p)?,
            None => build_spt(g.subarrays_per_bank, hp.spt_coverage, sub_seed(seed, SPT))?,
        }),
        _ => None,
    };
    (0..g.channels)
        .map(|ch| {
            let mseed = sub_seed(seed, MITIGATION + ch as u64);
            let (mitigation, refresh) = match &cfg.mitigation {
                MitigationConfig::None => (AnyMitigation::None, RefreshMode::Baseline),
                MitigationConfig::Para(p) => {
                    let p_th = p.resolve(&t, 0)?;
                    (AnyMitigation::Para(ParaRuntime::new(p_th, g.rows_per_bank, mseed)), RefreshMode::Baseline)
                }
                MitigationConfig::BlockHammer(b) => {
                    let bh = BlockHammer::new(block_hammer_config(b, &t)?, g, mseed);
                    (AnyMitigation::BlockHammer(Box::new(bh)), RefreshMode::Baseline)
                }
                MitigationConfig::SvardPara(s) => {
                    let sp = svard(s, cfg, profile.as_ref().expect("profile loaded"), 0, mseed)?;
                    (AnyMitigation::Svard(Box::new(sp)), RefreshMode::Baseline)
                }
                MitigationConfig::HiraMc(hp) => {
                    let pseed = sub_seed(seed, PREVENTIVE + ch as u64);
                    let deadline = hp.slack_trc as u64;
                    let preventive = match &hp.preventive {
                        None => None,
                        Some(PreventiveConfig::Para(p)) => {
                            Some(Preventive::Para(ParaRuntime::new(p.resolve(&t, deadline)?, g.rows_per_bank, pseed)))
                        }
                        Some(PreventiveConfig::SvardPara(s)) => Some(Preventive::Svard(Box::new(svard(
                            s,
                            cfg,
                            profile.as_ref().expect("profile loaded"),
                            deadline,
                            pseed,
                        )?))),
                    };
                    let spt = spt.clone().expect("SPT built");
                    let mc = HiraMc::new(g, ch, t, h, hp.slack_trc, spt, preventive)?;
                    (AnyMitigation::None, RefreshMode::Hira(Box::new(mc)))
                }
            };
            Controller::new(ch, g, t, h, cfg.controller, mitigation, refresh)
        })
        .collect()
}

/// Runs `cfg` to completion.
pub fn run(cfg: &SimConfig) -> Result<StatsReport> {
    Ok(Simulation::new(cfg.clone())?.run()?.report)
}
