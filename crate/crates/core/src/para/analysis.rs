use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::time::Ps;

pub const DEFAULT_TARGET_PRH: f64 = 1e-15;

/// Solver tolerance on |log10 p_rh − log10 target|.
const LOG10_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParaSolverInput {
    pub n_rh: u64,
    pub t_refw: Ps,
    pub t_rc: Ps,
    /// Hammers an attacker gains while a refresh waits in the queue
    /// (t_refslack / t_rc).
    pub hc_deadline: u64,
    pub target_prh: f64,
}

impl ParaSolverInput {
    pub fn new(n_rh: u64, t_refw: Ps, t_rc: Ps, hc_deadline: u64) -> Self {
        ParaSolverInput { n_rh, t_refw, t_rc, hc_deadline, target_prh: DEFAULT_TARGET_PRH }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rh <= self.hc_deadline {
            return Err(Error::Config(format!(
                "n_rh {} must exceed hc_deadline {}",
                self.n_rh, self.hc_deadline
            )));
        }
        if !(self.target_prh > 0.0 && self.target_prh < 1.0) {
            return Err(Error::Config(format!("target p_rh {} outside (0,1)", self.target_prh)));
        }
        if self.t_rc == 0 {
            return Err(Error::Config("t_rc must be positive".into()));
        }
        Ok(())
    }

    /// Activations that fit in one refresh window.
    pub fn window_acts(&self) -> u64 {
        self.t_refw / self.t_rc
    }

    /// Largest number of failed attempts an attacker can afford, each
    /// costing two activations.
    pub fn nf_max(&self) -> Result<u64> {
        let spare = self.window_acts() as i128 - self.n_rh as i128 - self.hc_deadline as i128;
        if spare < 0 {
            return Err(Error::Config(format!(
                "{} activations per window cannot reach n_rh {} (+{})",
                self.window_acts(),
                self.n_rh,
                self.hc_deadline
            )));
        }
        Ok((spare / 2) as u64)
    }
}

fn check_p(p_th: f64) -> Result<()> {
    if p_th > 0.0 && p_th < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("p_th {p_th} outside (0,1)")))
    }
}

/// Probability that an attempt is cut short by a refresh right after `hc`
/// undisturbed hammers.
pub fn p_failed(hc: u64, n_rh: u64, p_th: f64) -> Result<f64> {
    if hc < 1 || hc >= n_rh {
        return Err(Error::Domain(format!("hammer count {hc} outside [1, {n_rh})")));
    }
    if !(0.0..=1.0).contains(&p_th) {
        return Err(Error::Domain(format!("p_th {p_th} outside [0,1]")));
    }
    let half = p_th / 2.0;
    Ok((hc as f64 * (-half).ln_1p()).exp() * half)
}

/// ln Σ_{i=0..=m} x^i for 0 ≤ x < 1.
fn ln_geometric_sum(x: f64, m: u64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let ln_tail = (m as f64 + 1.0) * x.ln();
    (-ln_tail.exp()).ln_1p() - (-x).ln_1p()
}

/// Natural log of p_rh.
pub fn ln_p_rh(p_th: f64, input: &ParaSolverInput) -> Result<f64> {
    check_p(p_th)?;
    input.validate()?;
    let m = input.nf_max()?;
    let ln_q = (-p_th / 2.0).ln_1p();
    let x = (1.0 - p_th / 2.0) * (p_th / 2.0);
    Ok((input.n_rh - input.hc_deadline) as f64 * ln_q + ln_geometric_sum(x, m))
}

/// Worst-case probability that an aggressor reaches its threshold within
/// one refresh window: Σ_{Nf=0..Nf_max} q^(Nf + n_rh − hc_deadline)·r^Nf
/// with q = 1 − p_th/2 and r = p_th/2.
pub fn p_rh(p_th: f64, input: &ParaSolverInput) -> Result<f64> {
    ln_p_rh(p_th, input).map(f64::exp)
}

/// Bisection for the p_th whose p_rh equals the target.
pub fn solve_pth(input: &ParaSolverInput) -> Result<f64> {
    input.validate()?;
    let goal = input.target_prh.log10();
    let f = |p: f64| -> Result<f64> { Ok(ln_p_rh(p, input)? / std::f64::consts::LN_10 - goal) };
    let (mut lo, mut hi) = (f64::MIN_POSITIVE, 1.0 - f64::EPSILON);
    if f(hi)? > 0.0 {
        return Err(Error::Solver(format!(
            "target {} unreachable even at p_th → 1",
            input.target_prh
        )));
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        let v = f(mid)?;
        if v.abs() < LOG10_TOLERANCE {
            return Ok(mid);
        }
        if v > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Err(Error::Solver(format!("bisection stalled at p_th ≈ {lo}")))
}

/// Ratio between p_rh and the legacy estimate that ignores failed attempts
/// and refresh slack.
pub fn k_factor(p_th: f64, input: &ParaSolverInput) -> Result<f64> {
    check_p(p_th)?;
    let m = input.nf_max()?;
    let ln_q = (-p_th / 2.0).ln_1p();
    let x = (1.0 - p_th / 2.0) * (p_th / 2.0);
    Ok((-(input.hc_deadline as f64) * ln_q + ln_geometric_sum(x, m)).exp())
}
