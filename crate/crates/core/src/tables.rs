//! Resource-block and MCS lookup tables.
//!
//! Both tables are plain CSV (`#` comments allowed). The defaults are compiled
//! in from `data/`; [`RateTables::from_files`] loads replacements.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::OnceLock;

use serde::Deserialize;

use crate::error::{Error, Result};

const NRB_CSV: &str = include_str!("../data/nrb.csv");
const MCS_CSV: &str = include_str!("../data/mcs.csv");

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McsEntry {
    /// Bits per modulation symbol.
    pub qm: u32,
    pub code_rate_x1024: u32,
}

impl McsEntry {
    pub fn code_rate(&self) -> f64 {
        self.code_rate_x1024 as f64 / 1024.0
    }
}

#[derive(Debug, Clone, Default)]
pub struct RateTables {
    nrb: BTreeMap<(u32, u8), u32>,
    mcs: BTreeMap<u8, McsEntry>,
}

#[derive(Deserialize)]
struct NrbRow {
    bandwidth_mhz: u32,
    numerology: u8,
    n_rb: u32,
}

#[derive(Deserialize)]
struct McsRow {
    mcs_index: u8,
    qm: u32,
    code_rate_x1024: u32,
}

fn parse_rows<T: for<'de> Deserialize<'de>>(text: &str) -> Result<Vec<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row = rec.map_err(|e| Error::Parse {
            line: e.position().map(|p| p.line() as usize).unwrap_or(i + 2),
            msg: e.to_string(),
        })?;
        out.push(row);
    }
    Ok(out)
}

impl RateTables {
    pub fn parse(nrb_csv: &str, mcs_csv: &str) -> Result<Self> {
        let mut t = RateTables::default();
        for r in parse_rows::<NrbRow>(nrb_csv)? {
            if r.n_rb == 0 {
                return Err(Error::config(format!(
                    "N_RB for ({} MHz, numerology {}) must be positive",
                    r.bandwidth_mhz, r.numerology
                )));
            }
            t.nrb.insert((r.bandwidth_mhz, r.numerology), r.n_rb);
        }
        for r in parse_rows::<McsRow>(mcs_csv)? {
            if r.qm == 0 || r.code_rate_x1024 == 0 || r.code_rate_x1024 > 1024 {
                return Err(Error::config(format!("bad MCS row {}", r.mcs_index)));
            }
            t.mcs.insert(
                r.mcs_index,
                McsEntry {
                    qm: r.qm,
                    code_rate_x1024: r.code_rate_x1024,
                },
            );
        }
        Ok(t)
    }

    pub fn from_files(nrb: &Path, mcs: &Path) -> Result<Self> {
        let a = std::fs::read_to_string(nrb)?;
        let b = std::fs::read_to_string(mcs)?;
        Self::parse(&a, &b)
    }

    /// The compiled-in tables.
    pub fn standard() -> &'static RateTables {
        static TABLES: OnceLock<RateTables> = OnceLock::new();
        TABLES.get_or_init(|| RateTables::parse(NRB_CSV, MCS_CSV).expect("bundled tables parse"))
    }

    pub fn n_rb(&self, bandwidth_mhz: u32, numerology: u8) -> Result<u32> {
        self.nrb
            .get(&(bandwidth_mhz, numerology))
            .copied()
            .ok_or_else(|| {
                Error::config(format!(
                    "no N_RB entry for {bandwidth_mhz} MHz at numerology {numerology}"
                ))
            })
    }

    pub fn mcs(&self, index: u8) -> Result<McsEntry> {
        self.mcs
            .get(&index)
            .copied()
            .ok_or_else(|| Error::config(format!("unknown MCS index {index}")))
    }
}
