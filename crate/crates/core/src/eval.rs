//! Mode selection and per-configuration precomputation shared by the pipelines.

use serde::{Deserialize, Serialize};

use crate::breakdown::LatencyBreakdown;
use crate::error::{Error, Result};
use crate::model::{
    dl_bytes_per_slot_with, ul_bytes_per_slot_with, Duplexing, FrequencyRange, SystemConfig,
    SYMBOLS_PER_SLOT,
};
use crate::profile::ProcessingProfile;
use crate::sr::Schedule;
use crate::tables::RateTables;
use crate::{downlink, duplex, grant_free, uplink};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Uplink,
    Downlink,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Access {
    GrantBased,
    GrantFree,
}

/// Which pipeline to run. The duplexing variant comes from the configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Mode {
    pub direction: Direction,
    pub access: Access,
}

impl Mode {
    pub const UL: Mode = Mode {
        direction: Direction::Uplink,
        access: Access::GrantBased,
    };
    pub const DL: Mode = Mode {
        direction: Direction::Downlink,
        access: Access::GrantBased,
    };
    pub const GRANT_FREE: Mode = Mode {
        direction: Direction::Uplink,
        access: Access::GrantFree,
    };
}

/// A configuration checked and resolved for one mode.
#[derive(Debug, Clone)]
pub struct Evaluator {
    pub(crate) cfg: SystemConfig,
    pub(crate) mode: Mode,
    pub(crate) slot: f64,
    pub(crate) sched: Option<Schedule>,
    ul_cap: Result<u64>,
    dl_cap: Result<u64>,
    pub(crate) w2: f64,
    pub(crate) w4: f64,
}

impl Evaluator {
    pub fn new(cfg: &SystemConfig, mode: Mode) -> Result<Self> {
        Self::with_tables(cfg, mode, RateTables::standard())
    }

    pub fn with_tables(cfg: &SystemConfig, mode: Mode, tables: &RateTables) -> Result<Self> {
        let pattern = &cfg.pattern;
        pattern.check()?;
        let ctrl = &cfg.ctrl;
        ctrl.check_pdcch()?;
        if pattern.duplexing == Duplexing::Fdd {
            cfg.grid.check_range(FrequencyRange::Fr1)?;
        }
        if mode.direction == Direction::Downlink && mode.access == Access::GrantFree {
            return Err(Error::config("grant-free access applies to the uplink only"));
        }
        let slot = cfg.slot_ms();
        let sched = match (mode.direction, mode.access) {
            (Direction::Uplink, Access::GrantBased) => {
                ctrl.check_pucch()?;
                ctrl.check_schedule()?;
                if let Some(split) = &pattern.mini_slot {
                    if ctrl.pucch_start < split.sy_f_ul {
                        return Err(Error::config(format!(
                            "PUCCH start {} precedes the first UL symbol {}",
                            ctrl.pucch_start, split.sy_f_ul
                        )));
                    }
                }
                Some(Schedule::for_sr(cfg)?)
            }
            (Direction::Uplink, Access::GrantFree) => {
                ctrl.check_pucch()?;
                let gf = cfg.grant_free_schedule();
                crate::model::check_schedule(gf.period, gf.offset)?;
                Some(Schedule::for_grant_free(cfg)?)
            }
            (Direction::Downlink, _) => None,
        };
        if let Some(split) = &pattern.mini_slot {
            if ctrl.pdcch_symbols > split.sy_l_dl {
                return Err(Error::config(format!(
                    "PDCCH symbols {} exceed the last DL symbol {}",
                    ctrl.pdcch_symbols, split.sy_l_dl
                )));
            }
        }
        let ul_cap = ul_bytes_per_slot_with(tables, &cfg.link, &cfg.grid, ctrl, pattern);
        let dl_cap = dl_bytes_per_slot_with(tables, &cfg.link, &cfg.grid, ctrl, pattern);
        if mode.direction == Direction::Downlink {
            dl_cap.clone()?;
        }
        let sym = slot / f64::from(SYMBOLS_PER_SLOT);
        Ok(Evaluator {
            cfg: *cfg,
            mode,
            slot,
            sched,
            ul_cap,
            dl_cap,
            w2: f64::from(ctrl.pucch_start + ctrl.pucch_symbols) * sym,
            w4: f64::from(ctrl.pdcch_symbols) * sym,
        })
    }

    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub(crate) fn schedule(&self) -> &Schedule {
        self.sched.as_ref().expect("uplink evaluator carries a schedule")
    }

    /// Bytes per UL slot; errors if zero or if the tables lack the entry.
    pub fn ul_capacity(&self) -> Result<u64> {
        match self.ul_cap.clone()? {
            0 => Err(Error::config("UL slot carries no data symbols")),
            c => Ok(c),
        }
    }

    pub fn dl_capacity(&self) -> Result<u64> {
        self.dl_cap.clone()
    }

    /// Fraction of the slot occupied once the UL transmission ends.
    pub(crate) fn ul_end_fraction(&self) -> f64 {
        match (self.cfg.pattern.duplexing, &self.cfg.pattern.mini_slot) {
            (Duplexing::TddMiniSlot, Some(s)) => f64::from(s.sy_l_ul) / f64::from(SYMBOLS_PER_SLOT),
            _ => 1.0,
        }
    }

    pub(crate) fn dl_end_fraction(&self) -> f64 {
        match (self.cfg.pattern.duplexing, &self.cfg.pattern.mini_slot) {
            (Duplexing::TddMiniSlot, Some(s)) => f64::from(s.sy_l_dl) / f64::from(SYMBOLS_PER_SLOT),
            _ => 1.0,
        }
    }

    /// Minimum k2 for a UE needing `prep` ms after the PDCCH.
    pub(crate) fn k2_min(&self, prep: f64) -> i64 {
        crate::slot::slots_ceil(self.w4 + prep, self.slot)
    }

    /// k2 for the SR-triggered grant, honoring the override.
    pub(crate) fn k2(&self, dr: &ProcessingProfile) -> Result<i64> {
        let min = self.k2_min(dr.l2);
        match self.cfg.ctrl.k2_override {
            Some(k) if i64::from(k) < min => Err(Error::config(format!(
                "k2 override {k} below the UE minimum {min}"
            ))),
            Some(k) => Ok(i64::from(k)),
            None => Ok(min),
        }
    }

    /// k2 for BSR-triggered grants: never earlier than the SR-triggered one.
    pub(crate) fn k2_prime(&self, dr: &ProcessingProfile, k2: i64) -> i64 {
        self.k2_min(dr.l2_prime).max(k2)
    }

    /// Latency of one packet of `size` bytes arriving at `o1` ms.
    pub fn evaluate(&self, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
        if size == 0 {
            return Err(Error::config("packet size must be positive"));
        }
        if !(o1.is_finite() && o1 >= 0.0) {
            return Err(Error::config(format!("arrival time must be >= 0, got {o1}")));
        }
        dr.check()?;
        let dup = self.cfg.pattern.duplexing;
        match (self.mode.direction, self.mode.access, dup) {
            (Direction::Uplink, Access::GrantFree, _) => grant_free::latency(self, dr, o1, size),
            (Direction::Uplink, Access::GrantBased, Duplexing::TddCommon) => {
                uplink::latency(self, dr, o1, size)
            }
            (Direction::Uplink, Access::GrantBased, _) => duplex::ul_latency(self, dr, o1, size),
            (Direction::Downlink, _, Duplexing::TddCommon) => downlink::latency(self, dr, o1, size),
            (Direction::Downlink, _, _) => duplex::dl_latency(self, dr, o1, size),
        }
    }
}
