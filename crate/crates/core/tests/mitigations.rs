mod common;

use std::sync::Arc;

use common::*;
use disturbsim::dram::{CommandKind, Geometry};
use disturbsim::sim::{MitigationConfig, ParaParams, PreventiveConfig, ProfileSource, Simulation, SvardParams};
use disturbsim::svard::{LookupScope, ProfileSpec, VulnerabilityProfile};

#[test]
fn svard_cuts_preventive_refreshes() {
    let c = svard_vs_para(1024, 1_000_000, 21);
    assert_eq!(c.svard_weakest_pth, c.plain_pth);
    let saving = 1.0 - c.svard as f64 / c.plain as f64;
    assert!(saving >= 0.20, "saving {saving}: {} vs {}", c.svard, c.plain);
}

#[test]
fn svard_with_uniform_profile_issues_the_same_commands_as_para() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("uniform.prof");
    VulnerabilityProfile::uniform(Geometry::default().total_rows(), 1024).unwrap().save(&path).unwrap();
    let run = |m: MitigationConfig| {
        let mut cfg = sim_config(m, 640_000_000, 200_000_000, 6);
        cfg.workload.generators = vec![double_sided(0, 1, 900), random(1, 60_000, 4, 0.3)];
        let mut sim = Simulation::new(cfg).unwrap();
        sim.capture_commands(true);
        sim.run().unwrap()
    };
    let para = run(MitigationConfig::Para(ParaParams { p_th: None, n_rh: Some(1024), hc_deadline: None, target_prh: 1e-15 }));
    let svard = run(MitigationConfig::SvardPara(SvardParams {
        profile: ProfileSource { path: Some(path), spec: None, scale_to: None },
        enabled: true,
        lookup_scope: LookupScope::BlastRadiusMin,
        r_blast: 1,
        hc_deadline: None,
        target_prh: 1e-15,
    }));
    assert!(para.report.preventive_refreshes > 0);
    assert_eq!(para.commands, svard.commands);
}

#[test]
fn svard_disabled_runs_at_worst_case() {
    let spec = ProfileSpec::two_bin(0.05, 1024, 2);
    let mk = |enabled| {
        MitigationConfig::SvardPara(SvardParams {
            profile: ProfileSource { path: None, spec: Some(spec.clone()), scale_to: None },
            enabled,
            lookup_scope: LookupScope::BlastRadiusMin,
            r_blast: 1,
            hc_deadline: None,
            target_prh: 1e-15,
        })
    };
    let run = |m| {
        let mut cfg = sim_config(m, 640_000_000, 200_000_000, 8);
        cfg.workload.generators = vec![random(0, 0, 16, 0.0)];
        Simulation::new(cfg).unwrap().run().unwrap().report
    };
    let on = run(mk(true));
    let off = run(mk(false));
    assert!(on.preventive_refreshes < off.preventive_refreshes);
}

#[test]
fn hira_mixed_traffic_meets_every_deadline() {
    let preventive = PreventiveConfig::Para(ParaParams { p_th: None, n_rh: Some(256), hc_deadline: None, target_prh: 1e-15 });
    let cfg = hira_config(hira(2, Some(preventive)), vec![double_sided(0, 0, 101), random(1, 50_000, 8, 0.5)], 3);
    let r = Simulation::new(cfg).unwrap().run().unwrap().report;
    let h = r.hira.as_ref().unwrap();
    assert_eq!(h.deadline_violations, 0);
    assert_eq!(r.refresh_deadline_violations, 0);
    assert!(h.preventive_generated > 0);
    let v = r.verify.as_ref().unwrap();
    assert_eq!(v.coverage.violations, 0);
    assert_eq!(v.coverage.windows_checked, 3);
    assert_eq!(r.controller.hira_restore_violations, 0);
    assert_eq!(v.protocol_violations, 0);
    assert!(r.invariant_violations().is_empty());
}

#[test]
fn hira_replaces_ref_commands() {
    let mut cfg = hira_config(hira(2, None), memory_intensive(), 1);
    cfg.sim.duration_ps = HIRA_T_REFW;
    let mut sim = Simulation::new(cfg).unwrap();
    sim.capture_commands(true);
    let out = sim.run().unwrap();
    assert!(!out.commands.iter().any(|c| matches!(c.kind, CommandKind::Ref)));
    assert!(out.report.controller.hira > 0);
}

#[test]
fn profile_files_round_trip() {
    let g = Geometry::default();
    let p = VulnerabilityProfile::generate(&ProfileSpec::two_bin(0.05, 512, 3), g.total_rows(), 4).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("p.prof");
    p.save(&path).unwrap();
    let back = VulnerabilityProfile::load(&path, Some(g.total_rows())).unwrap();
    assert_eq!(Arc::new(back), Arc::new(p));
    assert!(VulnerabilityProfile::load(&path, Some(7)).is_err());
}
