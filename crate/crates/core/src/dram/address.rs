use serde::{Deserialize, Serialize};

use super::geometry::{BankId, Geometry};
use crate::error::{Error, Result};

/// Bytes per column access; the lowest address bits select a byte inside it.
pub const WORD_BYTES: u64 = 8;

/// Columns kept below the channel field by the MOP preset.
const MOP_LOW_COLUMNS: u32 = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MappingPreset {
    /// column | row | bank | rank | channel, least significant first.
    #[default]
    RowMajor,
    /// Minimalist open-page: a short column run, then channel, bank and
    /// rank, then the remaining column bits, with the row on top.
    Mop,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MappingField {
    Column,
    ColumnLow,
    ColumnHigh,
    Row,
    Bank,
    Rank,
    Channel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct DecodedAddress {
    pub channel: u32,
    pub rank: u32,
    pub bank: u32,
    pub row: u32,
    pub column: u32,
    pub subarray: u32,
}

impl DecodedAddress {
    pub fn bank_id(&self, g: &Geometry) -> BankId {
        g.bank_id(self.channel, self.rank, self.bank)
    }
}

/// Mixed-radix split of a physical address into DRAM coordinates. Each
/// field occupies a contiguous digit whose radix is the geometry bound, so
/// power-of-two geometries get plain bit fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AddressMapping {
    geometry: Geometry,
    fields: Vec<(MappingField, u64)>,
    capacity: u64,
}

impl AddressMapping {
    pub fn new(geometry: Geometry, preset: MappingPreset) -> Result<Self> {
        geometry.validate()?;
        let g = &geometry;
        let fields = match preset {
            MappingPreset::RowMajor => vec![
                (MappingField::Column, g.columns_per_row as u64),
                (MappingField::Row, g.rows_per_bank as u64),
                (MappingField::Bank, g.banks_per_rank as u64),
                (MappingField::Rank, g.ranks_per_channel as u64),
                (MappingField::Channel, g.channels as u64),
            ],
            MappingPreset::Mop => {
                let low = MOP_LOW_COLUMNS.min(g.columns_per_row);
                if !g.columns_per_row.is_multiple_of(low) {
                    return Err(Error::Config(format!(
                        "MOP mapping needs columns_per_row divisible by {low}"
                    )));
                }
                vec![
                    (MappingField::ColumnLow, low as u64),
                    (MappingField::Channel, g.channels as u64),
                    (MappingField::Bank, g.banks_per_rank as u64),
                    (MappingField::Rank, g.ranks_per_channel as u64),
                    (MappingField::ColumnHigh, (g.columns_per_row / low) as u64),
                    (MappingField::Row, g.rows_per_bank as u64),
                ]
            }
        };
        let capacity = g.total_rows() * g.columns_per_row as u64 * WORD_BYTES;
        Ok(AddressMapping { geometry, fields, capacity })
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geometry
    }

    /// Addressable bytes.
    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn decode(&self, addr: u64) -> Result<DecodedAddress> {
        if addr >= self.capacity {
            return Err(Error::Address(format!(
                "address {addr:#x} beyond capacity {:#x}",
                self.capacity
            )));
        }
        let mut rest = addr / WORD_BYTES;
        let mut d = DecodedAddress::default();
        let low_cols = self.radix_of(MappingField::ColumnLow);
        for &(field, radix) in &self.fields {
            let digit = (rest % radix) as u32;
            rest /= radix;
            match field {
                MappingField::Column => d.column = digit,
                MappingField::ColumnLow => d.column += digit,
                MappingField::ColumnHigh => d.column += digit * low_cols as u32,
                MappingField::Row => d.row = digit,
                MappingField::Bank => d.bank = digit,
                MappingField::Rank => d.rank = digit,
                MappingField::Channel => d.channel = digit,
            }
        }
        d.subarray = self.geometry.subarray_of(d.row);
        Ok(d)
    }

    /// Inverse of `decode` for the word-aligned address of `d`.
    pub fn encode(&self, d: &DecodedAddress) -> Result<u64> {
        let g = &self.geometry;
        if d.channel >= g.channels
            || d.rank >= g.ranks_per_channel
            || d.bank >= g.banks_per_rank
            || d.row >= g.rows_per_bank
            || d.column >= g.columns_per_row
        {
            return Err(Error::Address(format!("coordinates out of range: {d:?}")));
        }
        let low_cols = self.radix_of(MappingField::ColumnLow);
        let mut acc = 0u64;
        for &(field, radix) in self.fields.iter().rev() {
            let digit = match field {
                MappingField::Column => d.column as u64,
                MappingField::ColumnLow => d.column as u64 % low_cols,
                MappingField::ColumnHigh => d.column as u64 / low_cols,
                MappingField::Row => d.row as u64,
                MappingField::Bank => d.bank as u64,
                MappingField::Rank => d.rank as u64,
                MappingField::Channel => d.channel as u64,
            };
            acc = acc * radix + digit;
        }
        Ok(acc * WORD_BYTES)
    }

    /// Byte address of column 0 of `row` in `bank`.
    pub fn row_address(&self, bank: BankId, row: u32, column: u32) -> Result<u64> {
        let (channel, rank, b) = self.geometry.split_bank(bank);
        self.encode(&DecodedAddress {
            channel,
            rank,
            bank: b,
            row,
            column,
            subarray: 0,
        })
    }

    fn radix_of(&self, field: MappingField) -> u64 {
        self.fields
            .iter()
            .find(|(f, _)| *f == field)
            .map_or(1, |&(_, r)| r)
    }
}
