use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::blockhammer::{AttackModel, BlockHammerMode};
use crate::dram::{Geometry, HiraTimings, MappingPreset, TimingParams};
use crate::error::{Error, Result};
use crate::memctrl::SchedulerConfig;
use crate::para::{ParaSolverInput, DEFAULT_TARGET_PRH};
use crate::svard::{LookupScope, ProfileSpec};
use crate::time::Ps;

use super::workload::GeneratorSpec;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    #[serde(default)]
    pub dram: DramConfig,
    #[serde(default)]
    pub controller: SchedulerConfig,
    #[serde(default)]
    pub mitigation: MitigationConfig,
    #[serde(default)]
    pub workload: WorkloadConfig,
    pub sim: RunConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DramConfig {
    pub geometry: Geometry,
    pub timing: TimingParams,
    pub hira: HiraTimings,
    pub mapping: MappingPreset,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub duration_ps: Ps,
    pub seed: u64,
    #[serde(default)]
    pub verify: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
    /// Also write every issued command as JSON lines.
    pub commands: bool,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadConfig {
    pub traces: Vec<PathBuf>,
    pub generators: Vec<GeneratorSpec>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MitigationConfig {
    #[default]
    None,
    Para(ParaParams),
    BlockHammer(BlockHammerParams),
    HiraMc(HiraParams),
    SvardPara(SvardParams),
}

impl MitigationConfig {
    pub fn name(&self) -> &'static str {
        match self {
            MitigationConfig::None => "none",
            MitigationConfig::Para(_) => "para",
            MitigationConfig::BlockHammer(_) => "block_hammer",
            MitigationConfig::HiraMc(_) => "hira_mc",
            MitigationConfig::SvardPara(_) => "svard_para",
        }
    }
}

/// Either a fixed probability or a threshold to solve one for.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParaParams {
    #[serde(default)]
    pub p_th: Option<f64>,
    #[serde(default)]
    pub n_rh: Option<u64>,
    #[serde(default)]
    pub hc_deadline: Option<u64>,
    #[serde(default = "default_target")]
    pub target_prh: f64,
}

fn default_target() -> f64 {
    DEFAULT_TARGET_PRH
}

impl ParaParams {
    pub fn solver_input(&self, n_rh: u64, t: &TimingParams, default_deadline: u64) -> ParaSolverInput {
        ParaSolverInput {
            target_prh: self.target_prh,
            ..ParaSolverInput::new(n_rh, t.t_refw, t.t_rc, self.hc_deadline.unwrap_or(default_deadline))
        }
    }

    pub fn resolve(&self, t: &TimingParams, default_deadline: u64) -> Result<f64> {
        match (self.p_th, self.n_rh) {
            (Some(p), None) if p > 0.0 && p < 1.0 => Ok(p),
            (Some(p), None) => Err(Error::Config(format!("p_th {p} outside (0,1)"))),
            (None, Some(n)) => crate::para::solve_pth(&self.solver_input(n, t, default_deadline)),
            _ => Err(Error::Config("PARA needs exactly one of p_th or n_rh".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlockHammerParams {
    pub n_rh: u64,
    #[serde(default)]
    pub mode: BlockHammerMode,
    #[serde(default)]
    pub attack_model: AttackModel,
    /// Filter lifetime; defaults to t_refw.
    #[serde(default)]
    pub t_cbf_ps: Option<Ps>,
    #[serde(default)]
    pub q_max: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HiraParams {
    /// Refresh deadline slack in multiples of t_rc (HiRA-N).
    #[serde(default = "default_slack", alias = "t_refslack_rc_multiples")]
    pub slack_trc: u32,
    #[serde(default = "default_coverage")]
    pub spt_coverage: f64,
    #[serde(default)]
    pub spt_path: Option<PathBuf>,
    #[serde(default)]
    pub preventive: Option<PreventiveConfig>,
}

fn default_slack() -> u32 {
    2
}

fn default_coverage() -> f64 {
    0.32
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreventiveConfig {
    Para(ParaParams),
    SvardPara(SvardParams),
}

/// A profile file or a generated one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileSource {
    #[serde(default)]
    pub path: Option<PathBuf>,
    #[serde(default)]
    pub spec: Option<ProfileSpec>,
    /// Rescale so the weakest bin has this HC_first.
    #[serde(default)]
    pub scale_to: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SvardParams {
    pub profile: ProfileSource,
    #[serde(default = "yes")]
    pub enabled: bool,
    #[serde(default)]
    pub lookup_scope: LookupScope,
    #[serde(default = "one")]
    pub r_blast: u32,
    #[serde(default)]
    pub hc_deadline: Option<u64>,
    #[serde(default = "default_target")]
    pub target_prh: f64,
}

fn yes() -> bool {
    true
}

fn one() -> u32 {
    1
}

impl SimConfig {
    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let cfg: SimConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.into(),
            line: e.line(),
            msg: e.to_string(),
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Loads a config; relative paths inside it resolve against its
    /// directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text, path)?;
        if let Some(dir) = path.parent() {
            cfg.rebase(dir);
        }
        Ok(cfg)
    }

    fn rebase(&mut self, dir: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        };
        self.workload.traces.iter_mut().for_each(fix);
        match &mut self.mitigation {
            MitigationConfig::HiraMc(h) => {
                if let Some(p) = &mut h.spt_path {
                    fix(p);
                }
                if let Some(PreventiveConfig::SvardPara(s)) = &mut h.preventive {
                    if let Some(p) = &mut s.profile.path {
                        fix(p);
                    }
                }
            }
            MitigationConfig::SvardPara(s) => {
                if let Some(p) = &mut s.profile.path {
                    fix(p);
                }
            }
            _ => {}
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.dram.geometry.validate()?;
        self.dram.timing.validate()?;
        self.dram.hira.validate(&self.dram.timing)?;
        self.controller.validate()?;
        if self.sim.duration_ps == 0 {
            return Err(Error::Config("sim.duration_ps must be positive".into()));
        }
        for g in &self.workload.generators {
            g.validate(&self.dram.geometry)?;
        }
        Ok(())
    }
}
