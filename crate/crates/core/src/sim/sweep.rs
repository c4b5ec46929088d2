use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::config::SimConfig;
use super::engine::run;
use super::report::StatsReport;
use crate::error::{Error, Result};

/// Environment variable capping sweep worker threads.
pub const THREADS_ENV: &str = "DISTURBSIM_THREADS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepVariant {
    pub name: String,
    /// JSON merge patch applied to the base config.
    #[serde(default)]
    pub patch: Value,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub base: Value,
    pub seeds: Vec<u64>,
    pub variants: Vec<SweepVariant>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepResult {
    pub variant: String,
    pub seed: u64,
    pub report: StatsReport,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse { path: path.into(), line: e.line(), msg: e.to_string() })
    }

    /// Every (variant, seed) config in a fixed order.
    pub fn expand(&self, origin: &Path) -> Result<Vec<(String, SimConfig)>> {
        let mut out = Vec::new();
        for v in &self.variants {
            let mut doc = self.base.clone();
            json_patch::merge(&mut doc, &v.patch);
            for &seed in &self.seeds {
                doc["sim"]["seed"] = seed.into();
                let cfg = SimConfig::from_json(&doc.to_string(), origin)?;
                out.push((v.name.clone(), cfg));
            }
        }
        Ok(out)
    }
}

/// Runs every point of the sweep in parallel. Results come back in
/// expansion order regardless of scheduling.
pub fn run_sweep(sweep: &SweepConfig, origin: &Path) -> Result<Vec<SweepResult>> {
    let points = sweep.expand(origin)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|v| v.parse::<usize>().ok()) {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| {
        points
            .into_par_iter()
            .map(|(variant, cfg)| {
                let seed = cfg.sim.seed;
                run(&cfg).map(|report| SweepResult { variant, seed, report })
            })
            .collect()
    })
}
