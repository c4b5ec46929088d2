//! One line per acceptance criterion. Exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use disturbsim::blockhammer::{derive_config, AttackModel, BlockHammerMode};
use disturbsim::dram::{BankState, Geometry, HiraTimings, TimingParams};
use disturbsim::hira::{build_spt, conventional_two_row_latency, hira_issue};
use disturbsim::para::{k_factor, p_rh, solve_pth, ParaSolverInput};
use disturbsim::sim::{MitigationConfig, ParaParams, PreventiveConfig, Simulation, StatsReport};
use disturbsim::verify::{adversarial_search, feasibility_check, scaled_block_hammer, Feasibility, PatternFamily};

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn analytic_constants() -> Outcome {
    let t = TimingParams::default();
    let start = Instant::now();
    let cfg = derive_config(32_768, AttackModel::DoubleSided, &t).unwrap();
    let many = derive_config(32_768, AttackModel::geometric(6, 0.5), &t).unwrap();
    let took = start.elapsed();
    let t_delay_us = cfg.t_delay_exact / 1e6;
    // The scaling factor itself, before flooring to a row count.
    let ratio = AttackModel::geometric(6, 0.5).scaled_threshold(32_768) / 32_768.0;
    let delay_ok = rel(t_delay_us, 7.766) <= 0.01;
    let ratio_ok = rel(ratio, 0.2539) <= 1e-4;
    let fast = took < Duration::from_millis(1);
    check(
        delay_ok && ratio_ok && fast,
        format!(
            "t_delay {t_delay_us:.4} us (ok {delay_ok}); r_blast 6: n_rh_star {} = {ratio:.6}·n_rh vs 0.2539, \
             rel err {:.1e} (ok {ratio_ok}); {took:?}",
            many.n_rh_star,
            rel(ratio, 0.2539)
        ),
    )
}

fn hira_arithmetic() -> Outcome {
    let t = TimingParams::default();
    let h = HiraTimings::default();
    let g = Geometry::default();
    let spt = build_spt(g.subarrays_per_bank, 0.32, 1).unwrap();
    let [a, b] = spt.pairs()[0];
    let rps = g.rows_per_subarray();
    let s = hira_issue(&spt, &g, &t, &h, &BankState::default(), a * rps, b * rps, false, 0).unwrap();
    let conv = conventional_two_row_latency(&t);
    let permille = (conv - s.two_row_latency) * 1000 / conv;
    check(
        s.two_row_latency == 38_000 && conv == 78_250 && permille == 514,
        format!("{} ps vs {conv} ps, reduction {}.{}%", s.two_row_latency, permille / 10, permille % 10),
    )
}

fn para_k_factors() -> Outcome {
    let t = TimingParams::default();
    let mut lines = Vec::new();
    let mut pass = true;
    for (n, p, want) in [(50_000u64, 0.001, 1.0005), (1024, 0.4730, 1.0331), (64, 0.8341, 1.3212)] {
        let inp = ParaSolverInput::new(n, t.t_refw, t.t_rc, 0);
        let k = k_factor(p, &inp).unwrap();
        let ok = rel(k, want) <= 5e-3;
        pass &= ok;
        lines.push(format!("k({n}, {p}) = {k:.4} vs {want} (ok {ok})"));
    }
    for n in [50_000u64, 1024, 64] {
        let inp = ParaSolverInput::new(n, t.t_refw, t.t_rc, 0);
        let p = solve_pth(&inp).unwrap();
        let err = (p_rh(p, &inp).unwrap().log10() + 15.0).abs();
        pass &= err < 1e-6;
        lines.push(format!("solve({n}) log10 err {err:.1e}"));
    }
    check(pass, lines.join("; "))
}

fn para_oracles() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in 4..=8u64 {
        for w in 16..=64u64 {
            for p in [0.01, 0.1, 0.25, 0.5, 0.75, 0.99] {
                let inp = ParaSolverInput::new(n, w * T_RC, T_RC, 0);
                worst = worst.max(rel(p_rh(p, &inp).unwrap(), para_dp(n, 0, w, p)));
            }
        }
    }
    let dp_ok = worst < 1e-12;
    let (n, w, p) = (8u64, 64u64, 0.5);
    let bound = p_rh(p, &ParaSolverInput::new(n, w * T_RC, T_RC, 0)).unwrap();
    let live = para_mc_hammer(n, 0, w, p, 1_000_000, 2024);
    let modelled = para_mc_modelled(n, 0, w, p, 1_000_000, 2024);
    // Fails when the lower 99% confidence bound exceeds the analytic value.
    let mc_ok = live.lower_99() <= bound;
    let took = start.elapsed();
    check(
        dp_ok && mc_ok && took < Duration::from_secs(120),
        format!(
            "DP max rel err {worst:.1e} (ok {dp_ok}); n_rh 8, window 64, p_th 0.5: analytic {bound:.5}, \
             continuous hammering {:.5} (99% lower {:.5}, ok {mc_ok}), modelled pattern {:.5}; {took:.1?}",
            live.frequency(),
            live.lower_99(),
            modelled.frequency()
        ),
    )
}

fn blockhammer_safety() -> Outcome {
    let start = Instant::now();
    let seeds: Vec<u64> = (0..10).collect();
    let report =
        adversarial_search(&scaled_block_hammer(BlockHammerMode::FullFunctional), &PatternFamily::ALL, &seeds).unwrap();
    let mut per_family = Vec::new();
    for f in PatternFamily::ALL {
        let m = report.results.iter().filter(|r| r.family == f).map(|r| r.max_window_acts).max().unwrap_or(0);
        per_family.push(format!("{f:?} {m}"));
    }
    let sim_ok = report.holds();
    let t = TimingParams::default();
    let paper = derive_config(32_768, AttackModel::DoubleSided, &t).unwrap();
    let paper_verdict = feasibility_check(&paper);
    let mut sabotaged = paper.clone();
    sabotaged.t_delay = t.t_rc;
    sabotaged.t_delay_exact = t.t_rc as f64;
    sabotaged.n_bl = sabotaged.n_rh_star + 1;
    let sabotaged_ok = matches!(feasibility_check(&sabotaged), Feasibility::Feasible { activations, target, .. } if activations >= target);
    let took = start.elapsed();
    check(
        sim_ok && !paper_verdict.is_feasible() && sabotaged_ok && took < Duration::from_secs(300),
        format!(
            "window max {} vs n_rh_star {} (ok {sim_ok}) [{}]; paper config {}, sabotaged feasible {sabotaged_ok}; {took:.1?}",
            report.max_window_acts,
            report.bound.unwrap_or(0),
            per_family.join(", "),
            if paper_verdict.is_feasible() { "feasible" } else { "infeasible" }
        ),
    )
}

fn dcbf() -> Outcome {
    let under: u64 = (0..50).map(|s| dcbf_undercounts_stream(s, 100_000)).sum();
    check(under == 0, format!("{under} under-counts over 50 seeds x 1e5 ops"))
}

fn hira_guarantees() -> Outcome {
    let preventive = PreventiveConfig::Para(ParaParams { p_th: None, n_rh: Some(256), hc_deadline: None, target_prh: 1e-15 });
    let cfg = hira_config(hira(2, Some(preventive)), vec![double_sided(0, 0, 101), random(1, 50_000, 8, 0.5)], 3);
    let r = Simulation::new(cfg).unwrap().run().unwrap().report;
    let h = r.hira.as_ref().unwrap();
    let v = r.verify.as_ref().unwrap();
    let guarantees = h.deadline_violations == 0
        && r.refresh_deadline_violations == 0
        && v.coverage.violations == 0
        && v.coverage.windows_checked == 3
        && r.controller.hira_restore_violations == 0;
    let busy = |m| -> StatsReport {
        let mut cfg = hira_config(m, memory_intensive(), 3);
        cfg.sim.verify = false;
        Simulation::new(cfg).unwrap().run().unwrap().report
    };
    let base = busy(MitigationConfig::None).controller.refresh_busy_ps;
    let hira2 = busy(hira(2, None)).controller.refresh_busy_ps;
    check(
        guarantees && hira2 < base,
        format!(
            "deadline violations {}, coverage violations {} over {} windows, restore violations {}; \
             refresh busy HiRA-2 {hira2} ps vs REF {base} ps",
            h.deadline_violations,
            v.coverage.violations,
            v.coverage.windows_checked,
            r.controller.hira_restore_violations
        ),
    )
}

fn svard() -> Outcome {
    let c = svard_vs_para(1024, 1_000_000, 21);
    let saving = 1.0 - c.svard as f64 / c.plain as f64;
    check(
        saving >= 0.20 && c.svard_weakest_pth == c.plain_pth,
        format!(
            "{} vs {} preventive refreshes ({:.1}% fewer), weakest-bin p_th {} vs plain {}",
            c.svard,
            c.plain,
            100.0 * saving,
            c.svard_weakest_pth,
            c.plain_pth
        ),
    )
}

fn determinism() -> Outcome {
    let configs = std::fs::read_dir(concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "json") && !p.ends_with("sweep.json"))
        .collect::<Vec<_>>();
    let mut same = 0;
    for path in &configs {
        let mut cfg = disturbsim::sim::SimConfig::load(path).unwrap();
        // Keep the check quick: a tenth of each configured run.
        cfg.sim.duration_ps /= 10;
        let a = disturbsim::sim::run(&cfg).unwrap().to_json();
        let b = disturbsim::sim::run(&cfg).unwrap().to_json();
        same += (a == b) as usize;
    }
    check(same == configs.len() && !configs.is_empty(), format!("{same}/{} configs byte-identical", configs.len()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("analytic constants", analytic_constants),
        ("HiRA arithmetic", hira_arithmetic),
        ("PARA k-factors", para_k_factors),
        ("PARA oracle equivalence", para_oracles),
        ("BlockHammer safety", blockhammer_safety),
        ("D-CBF no false negatives", dcbf),
        ("HiRA-MC guarantees", hira_guarantees),
        ("Svard", svard),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += !o.pass as usize;
        println!("criterion {} {name}: {} - {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {}/{} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
