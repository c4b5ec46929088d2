use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_disturbsim"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

#[test]
fn para_solve_emits_csv() {
    let o = bin().args(["para-solve", "--n-rh", "1024,64"]).output().unwrap();
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n_rh,hc_deadline,p_th,p_rh,k"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|x| x.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    for r in &rows {
        assert!(r[2] > 0.0 && r[2] < 1.0);
        assert!((r[3].log10() + 15.0).abs() < 1e-6);
    }
    assert!(rows[1][2] > rows[0][2]);
    let o = bin().args(["para-solve", "--n-rh", "64", "--p-th", "0.8341", "--json"]).output().unwrap();
    assert!((json(&o)[0]["k"].as_f64().unwrap() - 1.3212).abs() < 0.01);
}

#[test]
fn run_writes_outputs_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("blockhammer_attack.json");
    for sub in ["a", "b"] {
        let out = dir.path().join(sub);
        let o = bin().arg("run").arg("--config").arg(&cfg).arg("--out").arg(&out).arg("--verify").output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        for f in ["stats.json", "threads.csv", "rhli.csv", "block_delays.csv"] {
            assert!(out.join(f).exists(), "{f}");
        }
    }
    let a = std::fs::read(dir.path().join("a/stats.json")).unwrap();
    let b = std::fs::read(dir.path().join("b/stats.json")).unwrap();
    assert_eq!(a, b);
    let o = bin().arg("run").arg("--config").arg(&cfg).args(["--seed", "99"]).output().unwrap();
    assert_eq!(json(&o)["seed"], 99);
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"sim": {"duration_ps": 10, "seed": 0}, "nope": true}"#).unwrap();
    let o = bin().arg("run").arg("--config").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn verify_reports_infeasible_paper_config() {
    let o = bin().args(["verify", "--n-rh", "32768"]).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["feasibility"]["verdict"], "infeasible");
    assert_eq!(v["n_rh_star"], 16384);
}

#[test]
fn sweep_runs_every_point() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .env("DISTURBSIM_THREADS", "2")
        .arg("sweep")
        .arg("--config")
        .arg(configs().join("sweep.json"))
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 3 * 3);
    assert!(dir.path().join("full/seed-2/stats.json").exists());
    // Observation never changes behaviour.
    let rows: Vec<Vec<&str>> = summary.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for seed in ["1", "2", "3"] {
        let act = |v: &str| rows.iter().find(|r| r[0] == v && r[1] == seed).unwrap()[2];
        assert_eq!(act("none"), act("observe"));
    }
}

#[test]
fn generated_attack_trace_runs() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("attack.trace");
    let o = bin()
        .args(["gen-attack", "--pattern", "double-sided", "--rows", "100,102", "--count", "500", "--out"])
        .arg(&trace)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert_eq!(std::fs::read_to_string(&trace).unwrap().lines().count(), 500);
    let cfg = dir.path().join("cfg.json");
    std::fs::write(
        &cfg,
        serde_json::json!({
            "workload": { "traces": ["attack.trace"] },
            "sim": { "duration_ps": 100_000_000u64, "seed": 0 }
        })
        .to_string(),
    )
    .unwrap();
    let o = bin().arg("run").arg("--config").arg(&cfg).output().unwrap();
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&o)["threads"][0]["served"], 500);
}

#[test]
fn svard_gen_writes_profile() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.prof");
    let o = bin().args(["svard-gen", "--weak", "0.1", "--hcfirst", "512", "--out"]).arg(&p).output().unwrap();
    assert!(o.status.success());
    assert_eq!(json(&o)["bin_hcfirst"], serde_json::json!([512, 1024]));
    assert!(p.exists());
}

#[test]
fn svard_profile_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("p.prof");
    let o = bin().args(["svard-gen", "--weak", "0.5", "--hcfirst", "1024", "--out"]).arg(&p).output().unwrap();
    assert!(o.status.success());
    let cfg = configs().join("svard.json");
    let run = |extra: &[&std::ffi::OsStr]| {
        let o = bin().arg("run").arg("--config").arg(&cfg).args(extra).output().unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        json(&o)["preventive_refreshes"].as_u64().unwrap()
    };
    let base = run(&[]);
    let weaker = run(&["--svard-profile".as_ref(), p.as_os_str()]);
    // Ten times the weak rows means more refreshes.
    assert!(weaker > base, "{weaker} vs {base}");
    let o = bin().arg("run").arg("--config").arg(configs().join("para.json")).arg("--svard-profile").arg(&p).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}
