use serde::{Deserialize, Serialize};

use crate::dram::DecodedAddress;
use crate::error::{Error, Result};
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RequestKind {
    Read,
    Write,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemoryRequest {
    pub id: u64,
    pub arrival: Ps,
    pub thread: u32,
    pub kind: RequestKind,
    pub addr: DecodedAddress,
    pub completion: Option<Ps>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RowPolicy {
    #[default]
    Open,
    Closed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchedulerConfig {
    pub read_queue_len: usize,
    pub write_queue_len: usize,
    /// Column commands to one open row before a waiting conflict may close it.
    pub column_cap: u32,
    pub row_policy: RowPolicy,
}

impl Default for SchedulerConfig {
    fn default() -> Self {
        SchedulerConfig { read_queue_len: 64, write_queue_len: 64, column_cap: 16, row_policy: RowPolicy::Open }
    }
}

impl SchedulerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.read_queue_len == 0 || self.write_queue_len == 0 {
            return Err(Error::Config("queue lengths must be >= 1".into()));
        }
        if self.column_cap == 0 {
            return Err(Error::Config("column_cap must be >= 1".into()));
        }
        Ok(())
    }
}
