use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hira::HiraStats;
use crate::memctrl::ControllerStats;
use crate::time::Ps;
use crate::verify::CoverageReport;

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ThreadReport {
    pub thread: u32,
    pub offered: u64,
    pub served: u64,
    pub in_flight: u64,
    pub rejected_final: u64,
    pub rejected_attempts: u64,
    pub latency_mean_ps: f64,
    pub latency_p50_ps: Ps,
    pub latency_p90_ps: Ps,
    pub latency_p99_ps: Ps,
    pub latency_max_ps: Ps,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RhliEntry {
    pub thread: u32,
    pub bank: u32,
    pub rhli: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub commands_checked: u64,
    pub protocol_violations: u64,
    pub first_protocol_violations: Vec<String>,
    pub activations: u64,
    pub max_window_acts: u64,
    /// (bank, row) of the row that reached the maximum.
    pub max_window_row: Option<(u32, u32)>,
    pub coverage: CoverageReport,
    /// Set when the mitigation promises a per-row activation bound.
    pub window_bound: Option<u64>,
    pub window_bound_exceeded: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct StatsReport {
    pub mitigation: String,
    pub seed: u64,
    pub duration_ps: Ps,
    pub threads: Vec<ThreadReport>,
    pub controller: ControllerStats,
    pub preventive_refreshes: u64,
    pub rhli: Vec<RhliEntry>,
    pub hira: Option<HiraStats>,
    pub refresh_deadline_violations: u64,
    pub verify: Option<VerifyReport>,
}

impl StatsReport {
    /// Problems that must fail a run.
    pub fn invariant_violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.refresh_deadline_violations > 0 {
            v.push(format!("{} refresh deadline violations", self.refresh_deadline_violations));
        }
        if self.controller.hira_restore_violations > 0 {
            v.push(format!("{} rows closed before full restoration", self.controller.hira_restore_violations));
        }
        let c = &self.controller;
        if c.row_hits + c.row_misses + c.row_conflicts != c.column_accesses() {
            v.push("row-buffer outcome counts do not add up".into());
        }
        for t in &self.threads {
            if t.served + t.in_flight + t.rejected_final != t.offered {
                v.push(format!("thread {}: request conservation broken", t.thread));
            }
        }
        if let Some(r) = &self.verify {
            if r.protocol_violations > 0 {
                v.push(format!("{} protocol violations", r.protocol_violations));
            }
            if r.coverage.violations > 0 {
                v.push(format!("{} refresh coverage violations", r.coverage.violations));
            }
            if r.window_bound_exceeded {
                v.push(format!("row activated {} times in one window", r.max_window_acts));
            }
        }
        v
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    /// Writes stats.json plus CSV series into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let put = |name: &str, body: String| {
            let p = dir.join(name);
            std::fs::write(&p, body).map_err(|e| Error::io(&p, e))
        };
        put("stats.json", self.to_json())?;
        let mut s = String::from("thread,offered,served,in_flight,rejected_final,p50_ps,p90_ps,p99_ps,max_ps\n");
        for t in &self.threads {
            s += &format!(
                "{},{},{},{},{},{},{},{},{}\n",
                t.thread, t.offered, t.served, t.in_flight, t.rejected_final,
                t.latency_p50_ps, t.latency_p90_ps, t.latency_p99_ps, t.latency_max_ps
            );
        }
        put("threads.csv", s)?;
        let mut s = String::from("thread,bank,rhli\n");
        for r in &self.rhli {
            s += &format!("{},{},{}\n", r.thread, r.bank, r.rhli);
        }
        put("rhli.csv", s)?;
        let mut s = String::from("delay_ns_below,count\n");
        for (b, n) in &self.controller.block_delay_hist {
            s += &format!("{},{}\n", 1u64 << b, n);
        }
        put("block_delays.csv", s)
    }
}

/// Latency summary from raw samples.
pub fn thread_report(thread: u32, mut lat: Vec<Ps>) -> ThreadReport {
    lat.sort_unstable();
    let pct = |p: f64| -> Ps {
        if lat.is_empty() {
            0
        } else {
            lat[((p * lat.len() as f64).ceil() as usize).clamp(1, lat.len()) - 1]
        }
    };
    ThreadReport {
        thread,
        served: lat.len() as u64,
        latency_mean_ps: if lat.is_empty() { 0.0 } else { lat.iter().sum::<u64>() as f64 / lat.len() as f64 },
        latency_p50_ps: pct(0.5),
        latency_p90_ps: pct(0.9),
        latency_p99_ps: pct(0.99),
        latency_max_ps: lat.last().copied().unwrap_or(0),
        ..ThreadReport::default()
    }
}

pub fn write_commands(path: &Path, cmds: &[crate::dram::IssuedCommand]) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = std::io::BufWriter::new(std::fs::File::create(path).map_err(io)?);
    for c in cmds {
        serde_json::to_writer(&mut w, c).map_err(|e| Error::json(path, e))?;
        w.write_all(b"\n").map_err(io)?;
    }
    w.flush().map_err(io)
}

pub(crate) fn rhli_entries(raw: impl IntoIterator<Item = (u32, u32, f64)>) -> Vec<RhliEntry> {
    let map: BTreeMap<(u32, u32), f64> = raw.into_iter().map(|(t, b, r)| ((t, b), r)).collect();
    map.into_iter().map(|((thread, bank), rhli)| RhliEntry { thread, bank, rhli }).collect()
}
