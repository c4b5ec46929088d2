use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use disturbsim::blockhammer::{derive_config, AttackModel, BlockHammerMode};
use disturbsim::dram::{AddressMapping, Geometry, MappingPreset, TimingParams};
use disturbsim::para::{k_factor, p_rh, solve_pth, ParaSolverInput, DEFAULT_TARGET_PRH};
use disturbsim::sim::{
    block_hammer_config, gen_attack, run_sweep, write_commands, write_trace, AttackPattern, AttackSpec, HiraParams,
    MitigationConfig, PreventiveConfig, ProfileSource, SimConfig, Simulation, SweepConfig,
};
use disturbsim::svard::{ProfileSpec, VulnerabilityProfile};
use disturbsim::verify::{adversarial_search, feasibility_check, scaled_block_hammer, PatternFamily};
use disturbsim::{Error, Result};

#[derive(Parser)]
#[command(name = "disturbsim", version, about = "DRAM read-disturbance mitigation simulator")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate one configuration and write stats.
    Run(RunArgs),
    /// Run a parameter sweep in parallel (DISTURBSIM_THREADS caps workers).
    Sweep(SweepArgs),
    /// Solve PARA's p_th for a threshold, or evaluate a given p_th.
    ParaSolve(ParaArgs),
    /// BlockHammer epoch feasibility and optional adversarial search.
    Verify(VerifyArgs),
    /// Generate a binned vulnerability profile.
    SvardGen(SvardArgs),
    /// Write an attack trace.
    GenAttack(AttackArgs),
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Replay-validate commands and track per-row activation windows.
    #[arg(long)]
    verify: bool,
    /// Vulnerability profile for a Svärd mitigation, replacing the
    /// config's profile source.
    #[arg(long)]
    svard_profile: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParaArgs {
    /// One or more thresholds, comma separated; one CSV row each.
    #[arg(long, value_delimiter = ',', required = true)]
    n_rh: Vec<u64>,
    #[arg(long, default_value_t = 0)]
    hc_deadline: u64,
    #[arg(long, default_value_t = DEFAULT_TARGET_PRH)]
    target: f64,
    /// Evaluate this p_th instead of solving for one.
    #[arg(long)]
    p_th: Option<f64>,
    /// Take t_refw and t_rc from a simulation config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print a JSON array instead of CSV.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct VerifyArgs {
    /// Simulation config with a block_hammer mitigation.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Threshold to derive a configuration for when no config is given.
    #[arg(long, default_value_t = 32_768)]
    n_rh: u64,
    /// Also run every attack family at the scaled configuration.
    #[arg(long)]
    adversarial: bool,
    #[arg(long, default_value_t = 10)]
    seeds: u64,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SvardArgs {
    #[arg(long)]
    out: PathBuf,
    /// Geometry source; defaults to the built-in geometry.
    #[arg(long)]
    config: Option<PathBuf>,
    /// JSON ProfileSpec; overrides the two-bin flags.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 0.05)]
    weak: f64,
    #[arg(long, default_value_t = 1024)]
    hcfirst: u64,
    #[arg(long, default_value_t = 2)]
    factor: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum PatternArg {
    SingleRow,
    DoubleSided,
    ManySided,
    BurstIdle,
}

#[derive(Args)]
struct AttackArgs {
    #[arg(long, value_enum)]
    pattern: PatternArg,
    #[arg(long)]
    out: PathBuf,
    /// Flat bank id.
    #[arg(long, default_value_t = 0)]
    bank: u32,
    #[arg(long, value_delimiter = ',', required = true)]
    rows: Vec<u32>,
    #[arg(long, default_value_t = 1_000)]
    count: u64,
    /// Request spacing; defaults to t_rc.
    #[arg(long)]
    interval_ps: Option<u64>,
    #[arg(long, default_value_t = 8)]
    burst: u32,
    #[arg(long, default_value_t = 1_000_000)]
    idle_ps: u64,
    #[arg(long, default_value_t = 0)]
    thread: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Geometry, mapping and timing source.
    #[arg(long)]
    config: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Run(a) => cmd_run(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::ParaSolve(a) => cmd_para(a),
        Cmd::Verify(a) => cmd_verify(a),
        Cmd::SvardGen(a) => cmd_svard(a),
        Cmd::GenAttack(a) => cmd_attack(a),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

/// Geometry, mapping and timing from an optional config.
fn dram_of(config: Option<&Path>) -> Result<(Geometry, MappingPreset, TimingParams)> {
    match config {
        Some(p) => {
            let c = SimConfig::load(p)?;
            Ok((c.dram.geometry, c.dram.mapping, c.dram.timing))
        }
        None => Ok((Geometry::default(), MappingPreset::default(), TimingParams::default())),
    }
}

fn cmd_run(a: RunArgs) -> Result<bool> {
    let mut cfg = SimConfig::load(&a.config)?;
    if let Some(s) = a.seed {
        cfg.sim.seed = s;
    }
    cfg.sim.verify |= a.verify;
    if let Some(p) = a.svard_profile {
        let source = match &mut cfg.mitigation {
            MitigationConfig::SvardPara(s) => &mut s.profile,
            MitigationConfig::HiraMc(HiraParams { preventive: Some(PreventiveConfig::SvardPara(s)), .. }) => &mut s.profile,
            other => return Err(Error::Config(format!("--svard-profile needs a Svärd mitigation, config has {}", other.name()))),
        };
        *source = ProfileSource { path: Some(p), spec: None, scale_to: source.scale_to };
    }
    if a.out.is_some() {
        cfg.output.dir = a.out;
    }
    let mut sim = Simulation::new(cfg.clone())?;
    sim.capture_commands(cfg.output.commands && cfg.output.dir.is_some());
    let out = sim.run()?;
    if let Some(dir) = &cfg.output.dir {
        out.report.write(dir)?;
        if cfg.output.commands {
            write_commands(&dir.join("commands.jsonl"), &out.commands)?;
        }
    } else {
        print!("{}", out.report.to_json());
    }
    let problems = out.report.invariant_violations();
    for p in &problems {
        eprintln!("violation: {p}");
    }
    Ok(problems.is_empty())
}

fn cmd_sweep(a: SweepArgs) -> Result<bool> {
    let sweep = SweepConfig::load(&a.config)?;
    let results = run_sweep(&sweep, &a.config)?;
    let mut ok = true;
    let mut summary = String::from("variant,seed,act,blocked,preventive,p99_ps_max,violations\n");
    for r in &results {
        let v = r.report.invariant_violations();
        ok &= v.is_empty();
        let p99 = r.report.threads.iter().map(|t| t.latency_p99_ps).max().unwrap_or(0);
        summary += &format!(
            "{},{},{},{},{},{},{}\n",
            r.variant,
            r.seed,
            r.report.controller.act,
            r.report.controller.blocked_requests,
            r.report.preventive_refreshes,
            p99,
            v.len()
        );
        if let Some(dir) = &a.out {
            r.report.write(&dir.join(&r.variant).join(format!("seed-{}", r.seed)))?;
        }
    }
    match &a.out {
        Some(dir) => {
            let p = dir.join("summary.csv");
            std::fs::write(&p, summary).map_err(|e| Error::io(&p, e))?;
        }
        None => print!("{summary}"),
    }
    Ok(ok)
}

fn cmd_para(a: ParaArgs) -> Result<bool> {
    let (_, _, t) = dram_of(a.config.as_deref())?;
    let mut rows = Vec::new();
    for &n_rh in &a.n_rh {
        let input = ParaSolverInput { target_prh: a.target, ..ParaSolverInput::new(n_rh, t.t_refw, t.t_rc, a.hc_deadline) };
        let p_th = match a.p_th {
            Some(p) => p,
            None => solve_pth(&input)?,
        };
        rows.push(json!({
            "n_rh": n_rh,
            "hc_deadline": a.hc_deadline,
            "p_th": p_th,
            "p_rh": p_rh(p_th, &input)?,
            "k": k_factor(p_th, &input)?,
        }));
    }
    if a.json {
        print_json(&rows);
    } else {
        println!("n_rh,hc_deadline,p_th,p_rh,k");
        for r in &rows {
            println!("{},{},{},{:e},{}", r["n_rh"], r["hc_deadline"], r["p_th"], r["p_rh"].as_f64().unwrap_or(0.0), r["k"]);
        }
    }
    Ok(true)
}

fn cmd_verify(a: VerifyArgs) -> Result<bool> {
    let cfg = match &a.config {
        Some(p) => {
            let c = SimConfig::load(p)?;
            match &c.mitigation {
                MitigationConfig::BlockHammer(b) => block_hammer_config(b, &c.dram.timing)?,
                other => return Err(Error::Config(format!("verify needs block_hammer, config has {}", other.name()))),
            }
        }
        None => derive_config(a.n_rh, AttackModel::DoubleSided, &TimingParams::default())?,
    };
    let verdict = feasibility_check(&cfg);
    let mut safe = !verdict.is_feasible();
    let mut out = json!({
        "n_rh": cfg.n_rh,
        "n_rh_star": cfg.n_rh_star,
        "n_bl": cfg.n_bl,
        "t_delay_ps": cfg.t_delay,
        "feasibility": verdict,
    });
    if a.adversarial {
        let base = a.seed.unwrap_or(0);
        let seeds: Vec<u64> = (base..base + a.seeds).collect();
        let report = adversarial_search(&scaled_block_hammer(BlockHammerMode::FullFunctional), &PatternFamily::ALL, &seeds)?;
        safe &= report.holds();
        out["adversarial"] = serde_json::to_value(&report).expect("serializable");
    }
    print_json(&out);
    Ok(safe)
}

fn cmd_svard(a: SvardArgs) -> Result<bool> {
    let (g, _, _) = dram_of(a.config.as_deref())?;
    let spec = match &a.spec {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str::<ProfileSpec>(&text).map_err(|e| Error::json(p, e))?
        }
        None => ProfileSpec::two_bin(a.weak, a.hcfirst, a.factor),
    };
    let profile = VulnerabilityProfile::generate(&spec, g.total_rows(), a.seed)?;
    profile.save(&a.out)?;
    print_json(&json!({
        "rows": profile.rows(),
        "bin_hcfirst": profile.bin_hcfirst(),
        "path": a.out,
    }));
    Ok(true)
}

fn cmd_attack(a: AttackArgs) -> Result<bool> {
    let (g, preset, t) = dram_of(a.config.as_deref())?;
    let pattern = match a.pattern {
        PatternArg::SingleRow => AttackPattern::SingleRow,
        PatternArg::DoubleSided => AttackPattern::DoubleSided,
        PatternArg::ManySided => AttackPattern::ManySided { n: a.rows.len() as u32 },
        PatternArg::BurstIdle => AttackPattern::BurstIdle { burst: a.burst, idle_ps: a.idle_ps },
    };
    let spec = AttackSpec {
        pattern,
        thread: a.thread,
        bank: a.bank,
        rows: a.rows,
        interval_ps: a.interval_ps,
        count: Some(a.count),
        start_ps: 0,
        max_outstanding: None,
    };
    let mapping = AddressMapping::new(g, preset)?;
    let records: Vec<_> = gen_attack(&spec, &mapping, &t, a.seed)?.collect();
    write_trace(&a.out, &records)?;
    Ok(true)
}
