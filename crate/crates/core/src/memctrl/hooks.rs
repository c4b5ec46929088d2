use crate::dram::BankId;
use crate::error::Result;
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActSafety {
    Safe,
    Unsafe { retry_after: Ps },
}

/// Callbacks a read-disturbance mitigation receives from the controller.
/// Everything defaults to "do nothing".
pub trait Mitigation {
    /// Time-driven state changes up to `now`. Runs before any scheduling
    /// decision of that slot.
    fn advance(&mut self, _now: Ps) -> Result<()> {
        Ok(())
    }

    /// Next instant after `now` at which `advance` would change something.
    fn next_event(&self, _now: Ps) -> Option<Ps> {
        None
    }

    fn is_act_safe(&self, _bank: BankId, _row: u32, _now: Ps) -> ActSafety {
        ActSafety::Safe
    }

    /// In-flight request cap for a thread on a bank; `None` is unlimited.
    fn quota(&self, _thread: u32, _bank: BankId) -> Option<u32> {
        None
    }

    fn on_act(&mut self, _bank: BankId, _row: u32, _thread: Option<u32>, _now: Ps) -> Result<()> {
        Ok(())
    }

    /// Called when a demand row closes; returns a row to refresh
    /// preventively.
    fn on_close(&mut self, _bank: BankId, _row: u32, _now: Ps) -> Option<u32> {
        None
    }

    /// (thread, bank, RHLI) for pairs with nonzero likelihood.
    fn rhli_snapshot(&self) -> Vec<(u32, u32, f64)> {
        Vec::new()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct NoMitigation;

impl Mitigation for NoMitigation {}
