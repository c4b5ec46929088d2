use serde::Serialize;

use crate::blockhammer::BlockHammerConfig;
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EpochType {
    T0,
    T1,
    T2,
    T3,
    T4,
}

pub const EPOCH_TYPES: [EpochType; 5] = [EpochType::T0, EpochType::T1, EpochType::T2, EpochType::T3, EpochType::T4];

impl EpochType {
    /// Epoch types allowed immediately before this one.
    pub fn predecessors(self) -> &'static [EpochType] {
        use EpochType::*;
        match self {
            T0 | T1 | T2 => &[T0, T1, T3],
            T3 | T4 => &[T2, T4],
        }
    }
}

/// Per-epoch activation bounds of one aggressor row under RowBlocker.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochModel {
    pub t_ep: Ps,
    pub t_refw: Ps,
    pub t_rc: Ps,
    pub t_delay: f64,
    pub n_bl: u64,
}

impl EpochModel {
    pub fn new(cfg: &BlockHammerConfig) -> Self {
        EpochModel {
            t_ep: cfg.epoch_len(),
            t_refw: cfg.t_refw,
            t_rc: cfg.t_rc,
            t_delay: cfg.t_delay_exact,
            n_bl: cfg.n_bl,
        }
    }

    /// N_ep_max for a given N_BL* (= N_BL minus the previous epoch's count),
    /// in real arithmetic.
    pub fn n_ep_max(&self, ty: EpochType, n_bl_star: u64) -> f64 {
        let per_delay = self.t_ep as f64 / self.t_delay;
        match ty {
            EpochType::T0 => n_bl_star as f64 - 1.0,
            EpochType::T1 | EpochType::T3 => self.n_bl as f64 - 1.0,
            EpochType::T2 => per_delay - (1.0 - self.t_rc as f64 / self.t_delay) * n_bl_star as f64,
            EpochType::T4 => per_delay,
        }
    }

    /// N_ep_max with N_BL* chosen by the attacker from [1, N_BL], floored
    /// and clamped at zero. Every formula is linear in N_BL*, so the
    /// endpoints suffice.
    pub fn adversarial_max(&self, ty: EpochType) -> u64 {
        let hi = self.n_bl.max(1);
        let best = self.n_ep_max(ty, 1).max(self.n_ep_max(ty, hi));
        best.max(0.0).floor() as u64
    }

    /// Upper bound on the number of epochs inside one refresh window.
    pub fn max_epochs(&self) -> u64 {
        self.t_refw / self.t_ep
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Feasibility {
    /// No epoch mix reaches the target; `best` is the highest reachable
    /// activation count.
    Infeasible { best: u64, target: u64 },
    /// `witness[i]` epochs of type Ti reach `activations` ≥ target.
    Feasible { witness: [u64; 5], activations: u64, target: u64 },
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible { .. })
    }
}

fn admissible(n: &[u64; 5], epochs: u64) -> bool {
    // The predecessor inequalities as written force n2 == n3; one extra
    // instance on each side admits the window's first epoch.
    n.iter().sum::<u64>() <= epochs && n[2] <= n[3] + 1 && n[3] <= n[2] + 1
}

fn activations(n: &[u64; 5], max: &[u64; 5]) -> u64 {
    n.iter().zip(max).map(|(a, b)| a * b).sum()
}

/// Whether some mix of epoch types lets one row collect n_rh_star
/// activations inside a refresh window.
///
/// The search runs over every admissible (n2, n3). The remaining types are
/// unconstrained apart from the epoch budget and contribute linearly, so
/// spending that budget on the largest of them is optimal; the brute-force
/// test below checks this against full enumeration.
pub fn feasibility_check(cfg: &BlockHammerConfig) -> Feasibility {
    let model = EpochModel::new(cfg);
    let max: [u64; 5] = EPOCH_TYPES.map(|t| model.adversarial_max(t));
    let epochs = model.max_epochs();
    let target = cfg.n_rh_star;
    let free = [0usize, 1, 4].into_iter().max_by_key(|&i| (max[i], std::cmp::Reverse(i))).unwrap();
    let mut best: Option<([u64; 5], u64)> = None;
    for n2 in 0..=epochs {
        for n3 in n2.saturating_sub(1)..=(n2 + 1).min(epochs - n2) {
            let mut n = [0u64; 5];
            n[2] = n2;
            n[3] = n3;
            n[free] = epochs - n2 - n3;
            debug_assert!(admissible(&n, epochs));
            let a = activations(&n, &max);
            if best.is_none_or(|(_, b)| a > b) {
                best = Some((n, a));
            }
        }
    }
    let (witness, acts) = best.expect("at least the empty mix");
    if acts >= target {
        Feasibility::Feasible { witness, activations: acts, target }
    } else {
        Feasibility::Infeasible { best: acts, target }
    }
}

/// Exhaustive enumeration of every admissible mix, for small epoch budgets.
pub fn feasibility_brute_force(cfg: &BlockHammerConfig) -> u64 {
    let model = EpochModel::new(cfg);
    let max: [u64; 5] = EPOCH_TYPES.map(|t| model.adversarial_max(t));
    let e = model.max_epochs();
    let mut best = 0;
    for a in 0..=e {
        for b in 0..=e - a {
            for c in 0..=e - a - b {
                for d in 0..=e - a - b - c {
                    for f in 0..=e - a - b - c - d {
                        let n = [a, b, c, d, f];
                        if admissible(&n, e) {
                            best = best.max(activations(&n, &max));
                        }
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blockhammer::{derive_config, AttackModel};
    use crate::dram::TimingParams;

    #[test]
    fn paper_config_is_infeasible() {
        let cfg = derive_config(32_768, AttackModel::DoubleSided, &TimingParams::default()).unwrap();
        let v = feasibility_check(&cfg);
        assert!(!v.is_feasible(), "{v:?}");
    }

    #[test]
    fn sabotaged_config_is_feasible() {
        let t = TimingParams::default();
        let mut cfg = derive_config(32_768, AttackModel::DoubleSided, &t).unwrap();
        cfg.t_delay = t.t_rc;
        cfg.t_delay_exact = t.t_rc as f64;
        cfg.n_bl = cfg.n_rh_star + 1;
        match feasibility_check(&cfg) {
            Feasibility::Feasible { witness, activations, target } => {
                assert!(activations >= target);
                let model = EpochModel::new(&cfg);
                let max = EPOCH_TYPES.map(|t| model.adversarial_max(t));
                assert_eq!(activations, activations_of(&witness, &max));
            }
            other => panic!("{other:?}"),
        }
    }

    fn activations_of(n: &[u64; 5], max: &[u64; 5]) -> u64 {
        activations(n, max)
    }

    #[test]
    fn matches_brute_force() {
        let base = TimingParams { t_refw: 10_000_000, ..TimingParams::default() };
        for (n_rh, t_cbf_div) in [(64u64, 1u64), (64, 4), (128, 8), (200, 16)] {
            let mut cfg = derive_config(n_rh, AttackModel::DoubleSided, &base).unwrap();
            cfg.t_cbf = base.t_refw / t_cbf_div;
            let v = feasibility_check(&cfg);
            let best = match v {
                Feasibility::Infeasible { best, .. } => best,
                Feasibility::Feasible { activations, .. } => activations,
            };
            assert_eq!(best, feasibility_brute_force(&cfg), "n_rh {n_rh} div {t_cbf_div}");
        }
    }

    #[test]
    fn unit_threshold_is_feasible() {
        let t = TimingParams::default();
        let mut cfg = derive_config(1024, AttackModel::DoubleSided, &t).unwrap();
        cfg.n_rh_star = 1;
        cfg.n_bl = 0;
        assert!(feasibility_check(&cfg).is_feasible());
    }
}
