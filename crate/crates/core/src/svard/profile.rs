use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Bins are 4-bit identifiers.
pub const MAX_BINS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinSpec {
    pub fraction: f64,
    pub hcfirst: u64,
}

/// Bin fractions and HC_first values for a generated profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub bins: Vec<BinSpec>,
}

impl ProfileSpec {
    /// `weak` of the rows at `h`, the rest at `strong_factor * h`.
    pub fn two_bin(weak: f64, h: u64, strong_factor: u64) -> Self {
        ProfileSpec {
            bins: vec![
                BinSpec { fraction: weak, hcfirst: h },
                BinSpec { fraction: 1.0 - weak, hcfirst: h * strong_factor },
            ],
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    rows: u64,
    bin_hcfirst: BTreeMap<u8, u64>,
}

/// One 4-bit bin per row (rows indexed globally across banks) and the
/// HC_first of each bin. Bin ids ascend with HC_first, so bin 0 is the
/// weakest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VulnerabilityProfile {
    bins: Vec<u8>,
    bin_hcfirst: Vec<u64>,
}

impl VulnerabilityProfile {
    pub fn new(bins: Vec<u8>, bin_hcfirst: Vec<u64>) -> Result<Self> {
        if bin_hcfirst.is_empty() || bin_hcfirst.len() > MAX_BINS {
            return Err(Error::Profile(format!("{} bins; need 1..={MAX_BINS}", bin_hcfirst.len())));
        }
        if bin_hcfirst[0] == 0 || bin_hcfirst.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Profile("bin HC_first values must be positive and ascending".into()));
        }
        if let Some(b) = bins.iter().find(|&&b| b as usize >= bin_hcfirst.len()) {
            return Err(Error::Profile(format!("row uses undefined bin {b}")));
        }
        Ok(VulnerabilityProfile { bins, bin_hcfirst })
    }

    /// Same bin everywhere.
    pub fn uniform(rows: u64, hcfirst: u64) -> Result<Self> {
        Self::new(vec![0; rows as usize], vec![hcfirst])
    }

    /// Assigns exactly round(fraction * rows) rows to each bin (the last
    /// bin takes the remainder) and shuffles the assignment.
    pub fn generate(spec: &ProfileSpec, rows: u64, seed: u64) -> Result<Self> {
        let mut bins = spec.bins.clone();
        if bins.is_empty() || bins.len() > MAX_BINS {
            return Err(Error::Profile(format!("{} bins; need 1..={MAX_BINS}", bins.len())));
        }
        let total: f64 = bins.iter().map(|b| b.fraction).sum();
        if bins.iter().any(|b| b.fraction.is_nan() || b.fraction < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Profile(format!("bin fractions sum to {total}, not 1")));
        }
        bins.sort_by_key(|b| b.hcfirst);
        let mut ids = Vec::with_capacity(rows as usize);
        for (i, b) in bins.iter().enumerate() {
            let n = if i + 1 == bins.len() {
                rows as usize - ids.len()
            } else {
                ((b.fraction * rows as f64).round() as usize).min(rows as usize - ids.len())
            };
            ids.extend(std::iter::repeat_n(i as u8, n));
        }
        ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Self::new(ids, bins.iter().map(|b| b.hcfirst).collect())
    }

    pub fn rows(&self) -> u64 {
        self.bins.len() as u64
    }

    pub fn bin(&self, row: u64) -> u8 {
        self.bins[row as usize]
    }

    pub fn bin_hcfirst(&self) -> &[u64] {
        &self.bin_hcfirst
    }

    pub fn hcfirst(&self, row: u64) -> u64 {
        self.bin_hcfirst[self.bin(row) as usize]
    }

    /// The worst-case HC_first over all rows.
    pub fn min_hcfirst(&self) -> u64 {
        self.bin_hcfirst[0]
    }

    /// Rescales every bin so the weakest equals `target`, keeping ratios.
    pub fn scaled_to(&self, target: u64) -> Result<Self> {
        if target == 0 {
            return Err(Error::Profile("scaling target must be positive".into()));
        }
        let min = self.min_hcfirst() as f64;
        let hc = self
            .bin_hcfirst
            .iter()
            .map(|&h| ((h as f64 * target as f64 / min).round() as u64).max(target))
            .collect();
        Self::new(self.bins.clone(), hc)
    }

    pub fn fraction(&self, bin: u8) -> f64 {
        self.bins.iter().filter(|&&b| b == bin).count() as f64 / self.bins.len() as f64
    }

    /// Writes a `# {json}` header line followed by `row_id,bin` lines.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e| Error::io(path, e);
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        let header = Header {
            rows: self.rows(),
            bin_hcfirst: self.bin_hcfirst.iter().enumerate().map(|(i, &h)| (i as u8, h)).collect(),
        };
        let json = serde_json::to_string(&header).map_err(|e| Error::json(path, e))?;
        writeln!(w, "# {json}").map_err(io)?;
        writeln!(w, "row_id,bin").map_err(io)?;
        for (i, b) in self.bins.iter().enumerate() {
            writeln!(w, "{i},{b}").map_err(io)?;
        }
        w.flush().map_err(io)
    }

    /// Loads a profile and checks it covers exactly `expected_rows` rows
    /// when given.
    pub fn load(path: &Path, expected_rows: Option<u64>) -> Result<Self> {
        let r = BufReader::new(File::open(path).map_err(|e| Error::io(path, e))?);
        let parse = |line: usize, msg: String| Error::Parse { path: path.into(), line, msg };
        let mut header: Option<Header> = None;
        let mut bins: Vec<Option<u8>> = Vec::new();
        for (i, line) in r.lines().enumerate() {
            let n = i + 1;
            let line = line.map_err(|e| Error::io(path, e))?;
            let line = line.trim();
            if let Some(json) = line.strip_prefix('#') {
                if header.is_some() {
                    return Err(parse(n, "second header line".into()));
                }
                let h: Header = serde_json::from_str(json.trim()).map_err(|e| parse(n, e.to_string()))?;
                bins = vec![None; h.rows as usize];
                header = Some(h);
                continue;
            }
            if line.is_empty() || line == "row_id,bin" {
                continue;
            }
            if header.is_none() {
                return Err(parse(n, "row data before the JSON header".into()));
            }
            let (row, bin) = line.split_once(',').ok_or_else(|| parse(n, "expected row_id,bin".into()))?;
            let row: usize = row.trim().parse().map_err(|e| parse(n, format!("row id: {e}")))?;
            let bin: u8 = bin.trim().parse().map_err(|e| parse(n, format!("bin: {e}")))?;
            if bin as usize >= MAX_BINS {
                return Err(parse(n, format!("bin {bin} does not fit in 4 bits")));
            }
            let slot = bins.get_mut(row).ok_or_else(|| parse(n, format!("row {row} beyond header row count")))?;
            if slot.replace(bin).is_some() {
                return Err(parse(n, format!("row {row} listed twice")));
            }
        }
        let h = header.ok_or_else(|| Error::Profile(format!("{}: missing header", path.display())))?;
        if let Some(missing) = bins.iter().position(Option::is_none) {
            return Err(Error::Profile(format!("{}: row {missing} has no bin", path.display())));
        }
        if let Some(rows) = expected_rows {
            if rows != h.rows {
                return Err(Error::Profile(format!(
                    "{}: profile covers {} rows, geometry has {rows}",
                    path.display(),
                    h.rows
                )));
            }
        }
        let n_bins = h.bin_hcfirst.len();
        if h.bin_hcfirst.keys().copied().ne(0..n_bins as u8) {
            return Err(Error::Profile("bin ids must be 0..n without gaps".into()));
        }
        Self::new(bins.into_iter().map(Option::unwrap).collect(), h.bin_hcfirst.into_values().collect())
    }
}
