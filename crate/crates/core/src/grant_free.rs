//! Grant-free uplink: the UE transmits directly in pre-configured slots.

use crate::breakdown::{Component as C, LatencyBreakdown};
use crate::error::Result;
use crate::eval::{Evaluator, Mode};
use crate::model::SystemConfig;
use crate::profile::ProcessingProfile;
use crate::slot::{ceil_div, ready_slot};

pub(crate) fn latency(ev: &Evaluator, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    let sched = ev.schedule();
    let s = ev.slot;
    let first = sched.next_at_or_after(ready_slot(o1, dr.l1, s));
    let slots = ceil_div(size, ev.ul_capacity()?);
    let mut last = first;
    for _ in 1..slots {
        last = sched.next_at_or_after(last + 1);
    }
    let mut b = LatencyBreakdown::default()
        .with(C::W1, first as f64 * s - o1)
        .with(C::W6, (last - first) as f64 * s + ev.ul_end_fraction() * s)
        .with(C::W7, dr.p4);
    b.total = b.sum_of(&[C::W1, C::W6, C::W7]);
    Ok(b)
}

/// `w1 + w6 + w7`, looping over pre-configured slots while bytes remain.
pub fn grant_free_ul_latency(
    cfg: &SystemConfig,
    dr: &ProcessingProfile,
    o1: f64,
    size: u64,
) -> Result<LatencyBreakdown> {
    Evaluator::new(cfg, Mode::GRANT_FREE)?.evaluate(dr, o1, size)
}
