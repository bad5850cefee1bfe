//! Static system configuration and the slot calendar.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tables::RateTables;

pub const SYMBOLS_PER_SLOT: u32 = 14;

/// SR periodicities (slots) accepted by the standard.
pub const SR_PERIODS: [u32; 13] = [1, 2, 4, 5, 8, 10, 16, 20, 40, 80, 160, 320, 640];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyRange {
    Fr1,
    Fr2,
}

impl FrequencyRange {
    pub fn numerologies(self) -> &'static [u8] {
        match self {
            FrequencyRange::Fr1 => &[0, 1, 2],
            FrequencyRange::Fr2 => &[2, 3, 4, 5, 6],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SlotGrid {
    pub numerology: u8,
}

impl SlotGrid {
    pub fn new(numerology: u8) -> Result<Self> {
        if numerology > 6 {
            return Err(Error::config(format!("numerology {numerology} outside 0..=6")));
        }
        Ok(SlotGrid { numerology })
    }

    /// Inverse of [`slot_ms`](Self::slot_ms); rejects durations that are not `1/2^mu`.
    pub fn from_slot_ms(slot_ms: f64) -> Result<Self> {
        (0..=6u8)
            .find(|&mu| (1.0 / f64::from(1u32 << mu) - slot_ms).abs() < 1e-12)
            .map(|numerology| SlotGrid { numerology })
            .ok_or_else(|| Error::config(format!("slot duration {slot_ms} ms is not 1/2^mu")))
    }

    #[inline]
    pub fn slot_ms(&self) -> f64 {
        1.0 / f64::from(1u32 << self.numerology)
    }

    pub fn check_range(&self, fr: FrequencyRange) -> Result<()> {
        if fr.numerologies().contains(&self.numerology) {
            Ok(())
        } else {
            Err(Error::config(format!(
                "numerology {} not available in {:?}",
                self.numerology, fr
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Duplexing {
    TddCommon,
    TddMiniSlot,
    Fdd,
}

/// Symbol layout of a mini-slot. Indices are 1-based; `sy_f_dl` is the
/// number of DL symbols at the start of the slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MiniSlotSplit {
    pub sy_f_dl: u32,
    pub sy_l_dl: u32,
    pub sy_f_ul: u32,
    pub sy_l_ul: u32,
}

impl MiniSlotSplit {
    /// Range checks the pipelines rely on. Does not require a guard gap.
    pub fn check_bounds(&self) -> Result<()> {
        let ok = (1..=SYMBOLS_PER_SLOT).contains(&self.sy_f_dl)
            && self.sy_f_dl <= self.sy_l_dl
            && self.sy_l_dl <= SYMBOLS_PER_SLOT
            && (1..=SYMBOLS_PER_SLOT).contains(&self.sy_f_ul)
            && self.sy_f_ul <= self.sy_l_ul
            && self.sy_l_ul <= SYMBOLS_PER_SLOT;
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("mini-slot split out of range: {self:?}")))
        }
    }

    /// Full structural check: bounds plus a DL/UL guard gap.
    pub fn validate(&self) -> Result<()> {
        self.check_bounds()?;
        if self.sy_l_dl >= self.sy_f_ul {
            return Err(Error::config(format!(
                "mini-slot split needs Sy_lDL < Sy_fUL, got {} and {}",
                self.sy_l_dl, self.sy_f_ul
            )));
        }
        Ok(())
    }
}

/// Which UL residues may carry an SR.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SrBound {
    /// Every UL slot `d..T-1`.
    #[default]
    Canonical,
    /// Excludes the first UL slot: `d+1..T-1`.
    SkipFirstUl,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TddPattern {
    pub total_slots: u32,
    pub dl_slots: u32,
    pub duplexing: Duplexing,
    pub mini_slot: Option<MiniSlotSplit>,
    #[serde(default)]
    pub sr_bound: SrBound,
}

impl TddPattern {
    pub fn common(total_slots: u32, dl_slots: u32) -> Self {
        TddPattern {
            total_slots,
            dl_slots,
            duplexing: Duplexing::TddCommon,
            mini_slot: None,
            sr_bound: SrBound::Canonical,
        }
    }

    pub fn mini_slot(total_slots: u32, split: MiniSlotSplit) -> Self {
        TddPattern {
            total_slots,
            dl_slots: 0,
            duplexing: Duplexing::TddMiniSlot,
            mini_slot: Some(split),
            sr_bound: SrBound::Canonical,
        }
    }

    pub fn fdd(total_slots: u32) -> Self {
        TddPattern {
            total_slots,
            dl_slots: 0,
            duplexing: Duplexing::Fdd,
            mini_slot: None,
            sr_bound: SrBound::Canonical,
        }
    }

    /// Checks used by every pipeline.
    pub fn check(&self) -> Result<()> {
        let t = self.total_slots;
        if t == 0 {
            return Err(Error::config("TDD period must have at least one slot"));
        }
        match self.duplexing {
            Duplexing::TddCommon => {
                if !(0 < self.dl_slots && self.dl_slots < t) {
                    return Err(Error::config(format!(
                        "need 0 < d < T, got d={} T={}",
                        self.dl_slots, t
                    )));
                }
                if self.mini_slot.is_some() {
                    return Err(Error::config("mini-slot split given for a common TDD pattern"));
                }
            }
            Duplexing::TddMiniSlot => match &self.mini_slot {
                Some(split) => split.check_bounds()?,
                None => return Err(Error::config("mini-slot duplexing needs a symbol split")),
            },
            Duplexing::Fdd => {
                if self.mini_slot.is_some() {
                    return Err(Error::config("mini-slot split given for FDD"));
                }
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check()?;
        if let Some(split) = &self.mini_slot {
            split.validate()?;
        }
        Ok(())
    }

    /// Inclusive residue range (mod T) of slots that can carry UL control.
    pub fn sr_residue_bounds(&self) -> (i64, i64) {
        let t = i64::from(self.total_slots);
        match self.duplexing {
            Duplexing::TddCommon => {
                let d = i64::from(self.dl_slots);
                match self.sr_bound {
                    SrBound::Canonical => (d, t - 1),
                    SrBound::SkipFirstUl => (d + 1, t - 1),
                }
            }
            _ => (0, t - 1),
        }
    }

    #[inline]
    pub fn is_dl(&self, slot: i64) -> bool {
        match self.duplexing {
            Duplexing::TddCommon => slot.rem_euclid(i64::from(self.total_slots)) < i64::from(self.dl_slots),
            _ => true,
        }
    }

    #[inline]
    pub fn is_ul(&self, slot: i64) -> bool {
        match self.duplexing {
            Duplexing::TddCommon => !self.is_dl(slot),
            _ => true,
        }
    }

    /// First DL-capable slot at or after `slot`.
    #[inline]
    pub fn next_dl(&self, slot: i64) -> i64 {
        match self.duplexing {
            Duplexing::TddCommon => {
                let t = i64::from(self.total_slots);
                let r = slot.rem_euclid(t);
                if r < i64::from(self.dl_slots) {
                    slot
                } else {
                    slot + t - r
                }
            }
            _ => slot,
        }
    }

    /// First UL-capable slot at or after `slot`.
    #[inline]
    pub fn next_ul(&self, slot: i64) -> i64 {
        match self.duplexing {
            Duplexing::TddCommon => {
                let d = i64::from(self.dl_slots);
                let r = slot.rem_euclid(i64::from(self.total_slots));
                if r >= d {
                    slot
                } else {
                    slot + d - r
                }
            }
            _ => slot,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    Dl,
    Ul,
}

/// DL/UL designation of a slot under common TDD. Mini-slot and FDD slots carry
/// both directions; query [`TddPattern::is_dl`] / [`TddPattern::is_ul`] for those.
pub fn slot_kind(cfg: &SystemConfig, slot_index: u64) -> SlotKind {
    if cfg.pattern.is_dl(slot_index as i64) {
        SlotKind::Dl
    } else {
        SlotKind::Ul
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlAndTiming {
    pub sr_period: u32,
    pub sr_offset: u32,
    /// First PUCCH symbol, 0-based.
    pub pucch_start: u32,
    pub pucch_symbols: u32,
    pub pdcch_symbols: u32,
    /// a1: slots the MAC schedules ahead for the radio front-end.
    pub advance_slots: u32,
    pub k2_override: Option<u32>,
    pub initial_grant_bytes: u64,
}

impl ControlAndTiming {
    pub fn check_pucch(&self) -> Result<()> {
        if self.pucch_symbols == 0 || self.pucch_start + self.pucch_symbols > SYMBOLS_PER_SLOT {
            return Err(Error::config(format!(
                "PUCCH start {} + symbols {} must fit in {} symbols",
                self.pucch_start, self.pucch_symbols, SYMBOLS_PER_SLOT
            )));
        }
        Ok(())
    }

    pub fn check_pdcch(&self) -> Result<()> {
        if !(1..=3).contains(&self.pdcch_symbols) {
            return Err(Error::config(format!(
                "PDCCH symbols must be 1..=3, got {}",
                self.pdcch_symbols
            )));
        }
        Ok(())
    }

    pub fn check_schedule(&self) -> Result<()> {
        check_schedule(self.sr_period, self.sr_offset)
    }
}

pub(crate) fn check_schedule(period: u32, offset: u32) -> Result<()> {
    if !SR_PERIODS.contains(&period) {
        return Err(Error::config(format!("period {period} not in {SR_PERIODS:?}")));
    }
    if offset >= period {
        return Err(Error::config(format!("offset {offset} must be below period {period}")));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinkBudget {
    pub bandwidth_mhz: u32,
    pub mcs_index: u8,
}

/// Pre-configured UL schedule for grant-free access.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GrantFreeConfig {
    pub period: u32,
    pub offset: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SystemConfig {
    pub grid: SlotGrid,
    pub pattern: TddPattern,
    pub ctrl: ControlAndTiming,
    pub link: LinkBudget,
    /// Defaults to the SR schedule when absent.
    pub grant_free: Option<GrantFreeConfig>,
}

impl SystemConfig {
    #[inline]
    pub fn slot_ms(&self) -> f64 {
        self.grid.slot_ms()
    }

    pub fn grant_free_schedule(&self) -> GrantFreeConfig {
        self.grant_free.unwrap_or(GrantFreeConfig {
            period: self.ctrl.sr_period,
            offset: self.ctrl.sr_offset,
        })
    }

    /// Every structural invariant, including the mini-slot guard gap.
    pub fn validate(&self) -> Result<()> {
        SlotGrid::new(self.grid.numerology)?;
        self.pattern.validate()?;
        self.ctrl.check_pucch()?;
        self.ctrl.check_pdcch()?;
        self.ctrl.check_schedule()?;
        if let Some(split) = &self.pattern.mini_slot {
            if self.ctrl.pucch_start < split.sy_f_ul {
                return Err(Error::config(format!(
                    "PUCCH start {} precedes the first UL symbol {}",
                    self.ctrl.pucch_start, split.sy_f_ul
                )));
            }
        }
        if let Some(gf) = &self.grant_free {
            check_schedule(gf.period, gf.offset)?;
        }
        if self.pattern.duplexing == Duplexing::Fdd {
            self.grid.check_range(FrequencyRange::Fr1)?;
        }
        Ok(())
    }
}

/// `floor(n_rb * 12 * qm * rate * symbols / 8)` bytes.
pub fn slot_capacity_bytes(n_rb: u32, qm: u32, code_rate: f64, symbols: u32) -> u64 {
    let bits = f64::from(n_rb) * 12.0 * f64::from(qm) * code_rate * f64::from(symbols);
    (bits / 8.0 + 1e-9).floor() as u64
}

fn capacity_with(
    tables: &RateTables,
    link: &LinkBudget,
    grid: &SlotGrid,
    symbols: u32,
) -> Result<u64> {
    let n_rb = tables.n_rb(link.bandwidth_mhz, grid.numerology)?;
    let mcs = tables.mcs(link.mcs_index)?;
    Ok(slot_capacity_bytes(n_rb, mcs.qm, mcs.code_rate(), symbols))
}

/// Data symbols left in a UL slot after PUCCH.
pub fn ul_data_symbols(ctrl: &ControlAndTiming, pattern: &TddPattern) -> u32 {
    let span = match (pattern.duplexing, &pattern.mini_slot) {
        (Duplexing::TddMiniSlot, Some(s)) => s.sy_l_ul + 1 - s.sy_f_ul,
        _ => SYMBOLS_PER_SLOT,
    };
    span.saturating_sub(ctrl.pucch_symbols)
}

/// Data symbols left in a DL slot after PDCCH.
pub fn dl_data_symbols(ctrl: &ControlAndTiming, pattern: &TddPattern) -> Result<u32> {
    ctrl.check_pdcch()?;
    let span = match (pattern.duplexing, &pattern.mini_slot) {
        (Duplexing::TddMiniSlot, Some(s)) => s.sy_f_dl,
        _ => SYMBOLS_PER_SLOT,
    };
    if span <= ctrl.pdcch_symbols {
        return Err(Error::config(format!(
            "no DL data symbols left: {span} DL symbols, {} PDCCH",
            ctrl.pdcch_symbols
        )));
    }
    Ok(span - ctrl.pdcch_symbols)
}

pub fn ul_bytes_per_slot(
    link: &LinkBudget,
    grid: &SlotGrid,
    ctrl: &ControlAndTiming,
    pattern: &TddPattern,
) -> Result<u64> {
    ul_bytes_per_slot_with(RateTables::standard(), link, grid, ctrl, pattern)
}

pub fn ul_bytes_per_slot_with(
    tables: &RateTables,
    link: &LinkBudget,
    grid: &SlotGrid,
    ctrl: &ControlAndTiming,
    pattern: &TddPattern,
) -> Result<u64> {
    capacity_with(tables, link, grid, ul_data_symbols(ctrl, pattern))
}

pub fn dl_bytes_per_slot(
    link: &LinkBudget,
    grid: &SlotGrid,
    ctrl: &ControlAndTiming,
    pattern: &TddPattern,
) -> Result<u64> {
    dl_bytes_per_slot_with(RateTables::standard(), link, grid, ctrl, pattern)
}

pub fn dl_bytes_per_slot_with(
    tables: &RateTables,
    link: &LinkBudget,
    grid: &SlotGrid,
    ctrl: &ControlAndTiming,
    pattern: &TddPattern,
) -> Result<u64> {
    let symbols = dl_data_symbols(ctrl, pattern)?;
    capacity_with(tables, link, grid, symbols)
}
