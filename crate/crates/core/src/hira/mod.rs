//! HiRA (hidden row activation) timing and the HiRA-MC refresh scheduler.

mod mc;
mod op;
mod refptr;
mod spt;

pub use mc::{HiraMc, HiraStats, PlannedRefresh, Preventive, RefreshKind, RefreshPlan, RefreshRequest};
pub use op::{conventional_two_row_latency, hira_issue, HiraSchedule, RefreshOpKind};
pub use refptr::RefPtrTable;
pub use spt::{build_spt, SubarrayPairsTable};
