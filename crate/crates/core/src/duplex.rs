//! Mini-slot TDD and FDD: every slot can carry both DL and UL, so grants and
//! data never wait for a slot of the right direction.

use crate::breakdown::{Component as C, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::eval::{Evaluator, Mode};
use crate::model::{Duplexing, SystemConfig};
use crate::profile::ProcessingProfile;
use crate::slot::ready_slot;
use crate::uplink::{bsr_grant, drain_end, first_flow};
use crate::downlink;

pub(crate) fn ul_latency(ev: &Evaluator, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    let s = ev.slot;
    dr.check_radio(ev.cfg.ctrl.advance_slots, s)?;
    let (f, k2) = first_flow(ev, dr, ready_slot(o1, dr.l1, s))?;
    let end = ev.ul_end_fraction() * s;
    let mut b = LatencyBreakdown::default()
        .with(C::W1, f.sr as f64 * s - o1)
        .with(C::W2, ev.w2)
        .with(C::W3, (f.grant - f.sr) as f64 * s)
        .with(C::W4, ev.w4)
        .with(C::W5, (f.pusch - f.grant) as f64 * s)
        .with(C::W7, dr.p4);
    let g_i = ev.cfg.ctrl.initial_grant_bytes;
    if size <= g_i {
        b.set(C::W6, end);
        b.total = b.sum_of(&[C::W1, C::W3, C::W5, C::W6, C::W7]);
        return Ok(b);
    }
    // The BSR goes out with the initial PUSCH; the large grant follows a full slot later.
    let (g, u) = bsr_grant(ev, dr, f.pusch, k2);
    let z = drain_end(&ev.cfg.pattern, u, size - g_i, ev.ul_capacity()?, true);
    b.set(C::W6, s);
    b.set(C::W3Prime, (g - (f.pusch + 1)) as f64 * s);
    b.set(C::W5Prime, (u - g) as f64 * s);
    b.set(C::W6Prime, (z - u) as f64 * s + end);
    b.total = b.sum_of(&[
        C::W1,
        C::W3,
        C::W5,
        C::W6,
        C::W3Prime,
        C::W5Prime,
        C::W6Prime,
        C::W7,
    ]);
    Ok(b)
}

pub(crate) fn dl_latency(ev: &Evaluator, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    downlink::latency(ev, dr, o1, size)
}

fn require(cfg: &SystemConfig, dup: Duplexing) -> Result<()> {
    if cfg.pattern.duplexing != dup {
        return Err(Error::config(format!("configuration is not {dup:?}")));
    }
    Ok(())
}

pub fn mini_slot_ul_latency(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    require(cfg, Duplexing::TddMiniSlot)?;
    Evaluator::new(cfg, Mode::UL)?.evaluate(dr, o1, size)
}

pub fn mini_slot_dl_latency(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    require(cfg, Duplexing::TddMiniSlot)?;
    Evaluator::new(cfg, Mode::DL)?.evaluate(dr, o1, size)
}

pub fn fdd_ul_latency(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    require(cfg, Duplexing::Fdd)?;
    Evaluator::new(cfg, Mode::UL)?.evaluate(dr, o1, size)
}

pub fn fdd_dl_latency(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    require(cfg, Duplexing::Fdd)?;
    Evaluator::new(cfg, Mode::DL)?.evaluate(dr, o1, size)
}

