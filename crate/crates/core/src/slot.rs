//! Slot arithmetic on millisecond timestamps.
//!
//! Slot durations are powers of two, so `t / S` is exact for any `t` that is
//! itself a slot multiple; the epsilon only absorbs noise from sums of
//! processing delays.

pub const EPS: f64 = 1e-9;

/// Index of the slot containing `t_ms`.
#[inline]
pub fn slots_floor(t_ms: f64, slot_ms: f64) -> i64 {
    (t_ms / slot_ms + EPS).floor() as i64
}

/// First slot boundary at or after `t_ms`, as a slot index.
#[inline]
pub fn slots_ceil(t_ms: f64, slot_ms: f64) -> i64 {
    (t_ms / slot_ms - EPS).ceil() as i64
}

/// First slot at which a UE that sees a packet at `o1` and needs `prep` ms
/// can act: the slot containing `o1 + prep`, but never one starting before `o1`.
#[inline]
pub fn ready_slot(o1: f64, prep: f64, slot_ms: f64) -> i64 {
    slots_floor(o1 + prep, slot_ms).max(slots_ceil(o1, slot_ms))
}

#[inline]
pub fn ceil_div(a: u64, b: u64) -> u64 {
    a.div_ceil(b)
}
