//! Request traces: one request per line, `<arrival_ps> <thread_id> <R|W>
//! <hex_address>`, arrivals non-decreasing. Blank lines and `#` comments
//! are skipped.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Lines, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memctrl::RequestKind;
use crate::time::Ps;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub arrival: Ps,
    pub thread: u32,
    pub kind: RequestKind,
    pub addr: u64,
}

impl TraceRecord {
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let mut it = line.split_whitespace();
        let mut field = |name: &str| it.next().ok_or_else(|| format!("missing {name}"));
        let arrival = field("arrival")?.parse::<Ps>().map_err(|e| format!("arrival: {e}"))?;
        let thread = field("thread id")?.parse::<u32>().map_err(|e| format!("thread id: {e}"))?;
        let kind = match field("R|W")? {
            "R" | "r" => RequestKind::Read,
            "W" | "w" => RequestKind::Write,
            other => return Err(format!("expected R or W, got {other:?}")),
        };
        let hex = field("address")?;
        let digits = hex.strip_prefix("0x").or_else(|| hex.strip_prefix("0X")).unwrap_or(hex);
        let addr = u64::from_str_radix(digits, 16).map_err(|e| format!("address {hex:?}: {e}"))?;
        if let Some(extra) = it.next() {
            return Err(format!("unexpected trailing field {extra:?}"));
        }
        Ok(TraceRecord { arrival, thread, kind, addr })
    }

    pub fn write_line(&self, w: &mut impl Write) -> std::io::Result<()> {
        let k = match self.kind {
            RequestKind::Read => 'R',
            RequestKind::Write => 'W',
        };
        writeln!(w, "{} {} {} {:#x}", self.arrival, self.thread, k, self.addr)
    }
}

/// Streams records from a trace file in constant memory.
pub struct TraceReader {
    path: PathBuf,
    lines: Lines<BufReader<File>>,
    line: usize,
    last: Ps,
}

impl TraceReader {
    pub fn open(path: &Path) -> Result<Self> {
        let f = File::open(path).map_err(|e| Error::io(path, e))?;
        Ok(TraceReader { path: path.into(), lines: BufReader::new(f).lines(), line: 0, last: 0 })
    }
}

impl Iterator for TraceReader {
    type Item = Result<TraceRecord>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let raw = match self.lines.next()? {
                Ok(l) => l,
                Err(e) => return Some(Err(Error::io(&self.path, e))),
            };
            self.line += 1;
            let text = raw.trim();
            if text.is_empty() || text.starts_with('#') {
                continue;
            }
            let err = |msg| Error::Parse { path: self.path.clone(), line: self.line, msg };
            let rec = match TraceRecord::parse(text) {
                Ok(r) => r,
                Err(msg) => return Some(Err(err(msg))),
            };
            if rec.arrival < self.last {
                return Some(Err(err(format!("arrival {} before previous {}", rec.arrival, self.last))));
            }
            self.last = rec.arrival;
            return Some(Ok(rec));
        }
    }
}

pub fn parse_trace(path: &Path) -> Result<TraceReader> {
    TraceReader::open(path)
}

pub fn write_trace<'a>(path: &Path, records: impl IntoIterator<Item = &'a TraceRecord>) -> Result<()> {
    let io = |e| Error::io(path, e);
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for r in records {
        r.write_line(&mut w).map_err(io)?;
    }
    w.flush().map_err(io)
}
