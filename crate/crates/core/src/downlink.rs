//! Downlink over a common TDD pattern.

use crate::breakdown::{Component as C, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::eval::{Evaluator, Mode};
use crate::model::{Duplexing, SystemConfig};
use crate::profile::ProcessingProfile;
use crate::slot::slots_ceil;
use crate::uplink::drain_end;

/// Shared by the TDD, mini-slot and FDD variants; only slot availability differs.
pub(crate) fn latency(ev: &Evaluator, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    let s = ev.slot;
    dr.check_radio(ev.cfg.ctrl.advance_slots, s)?;
    let pattern = &ev.cfg.pattern;
    let ready = slots_ceil(o1 + dr.p5, s);
    let first = pattern.next_dl(ready + i64::from(ev.cfg.ctrl.advance_slots) + 1);
    let cap = ev.dl_capacity()?;
    let last = drain_end(pattern, first, size, cap, false);
    // u3 spans the DL slots used (and any UL gaps in between); the final slot
    // ends early in a mini-slot.
    let u3 = ((last - first) as f64 + ev.dl_end_fraction()) * s;
    let mut b = LatencyBreakdown::default()
        .with(C::U1, ready as f64 * s - o1)
        .with(C::U2, (first - ready) as f64 * s)
        .with(C::U3, u3)
        .with(C::U4, dr.l3);
    b.total = b.sum_of(&[C::U1, C::U2, C::U3, C::U4]);
    Ok(b)
}

pub fn dl_latency_tdd(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    if cfg.pattern.duplexing != Duplexing::TddCommon {
        return Err(Error::config("this pipeline expects a common TDD pattern"));
    }
    Evaluator::new(cfg, Mode::DL)?.evaluate(dr, o1, size)
}

