//! Grant-based uplink over a common TDD pattern.
//!
//! A packet's path: wait for an SR opportunity (`w1`), SR to grant (`w3`),
//! grant to PUSCH (`w5`), the PUSCH slot itself (`w6`), gNB processing (`w7`).
//! Packets larger than the initial grant report a BSR on that PUSCH and are
//! drained by a second grant (`w3'`, `w5'`, `w6'`).

use crate::breakdown::{Component as C, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::eval::{Evaluator, Mode};
use crate::model::{Duplexing, SystemConfig, TddPattern};
use crate::profile::ProcessingProfile;
use crate::slot::{ceil_div, ready_slot, slots_ceil};

fn ul_evaluator(cfg: &SystemConfig) -> Result<Evaluator> {
    if cfg.pattern.duplexing != Duplexing::TddCommon {
        return Err(Error::config("this pipeline expects a common TDD pattern"));
    }
    Evaluator::new(cfg, Mode::UL)
}

pub fn compute_w2(cfg: &SystemConfig) -> Result<f64> {
    cfg.ctrl.check_pucch()?;
    Ok(f64::from(cfg.ctrl.pucch_start + cfg.ctrl.pucch_symbols) / 14.0 * cfg.slot_ms())
}

pub fn compute_w4(cfg: &SystemConfig) -> Result<f64> {
    cfg.ctrl.check_pdcch()?;
    Ok(f64::from(cfg.ctrl.pdcch_symbols) / 14.0 * cfg.slot_ms())
}

/// SR slot to grant slot. `o1 + w1` must be the start of the SR slot.
pub fn compute_w3(
    cfg: &SystemConfig,
    dr: &ProcessingProfile,
    o1: f64,
    w1: f64,
    w2: f64,
) -> Result<f64> {
    let s = cfg.slot_ms();
    dr.check_radio(cfg.ctrl.advance_slots, s)?;
    let sr_slot = ((o1 + w1) / s).round() as i64;
    let g = grant_slot(&cfg.pattern, sr_slot, slots_ceil(w2 + dr.p1, s), cfg.ctrl.advance_slots);
    Ok((g - sr_slot) as f64 * s)
}

/// Grant slot to PUSCH slot.
pub fn compute_w5(
    cfg: &SystemConfig,
    dr: &ProcessingProfile,
    grant_slot_index: i64,
    w4: f64,
) -> Result<f64> {
    let s = cfg.slot_ms();
    let k2 = k2_with(cfg, slots_ceil(w4 + dr.l2, s))?;
    let u = cfg.pattern.next_ul(grant_slot_index + k2);
    Ok((u - grant_slot_index) as f64 * s)
}

/// End of the BSR-carrying PUSCH slot to the large grant.
pub fn compute_w3_prime(cfg: &SystemConfig, dr: &ProcessingProfile, absolute_time: f64) -> Result<f64> {
    let s = cfg.slot_ms();
    dr.check_radio(cfg.ctrl.advance_slots, s)?;
    let x = (absolute_time / s).round() as i64;
    let g = grant_slot(&cfg.pattern, x, slots_ceil(dr.p1, s), cfg.ctrl.advance_slots);
    Ok((g - x) as f64 * s)
}

/// Large grant to its first PUSCH slot, using `l2'`.
pub fn compute_w5_prime(cfg: &SystemConfig, dr: &ProcessingProfile, grant_slot_index: i64) -> Result<f64> {
    let s = cfg.slot_ms();
    let w4 = compute_w4(cfg)?;
    let k2 = k2_with(cfg, slots_ceil(w4 + dr.l2_prime, s))?;
    let u = cfg.pattern.next_ul(grant_slot_index + k2);
    Ok((u - grant_slot_index) as f64 * s)
}

fn k2_with(cfg: &SystemConfig, k2_min: i64) -> Result<i64> {
    match cfg.ctrl.k2_override {
        Some(k) if i64::from(k) < k2_min => Err(Error::config(format!(
            "k2 override {k} below the UE minimum {k2_min}"
        ))),
        Some(k) => Ok(i64::from(k)),
        None => Ok(k2_min),
    }
}

#[inline]
fn grant_slot(pattern: &TddPattern, from: i64, proc_slots: i64, a1: u32) -> i64 {
    pattern.next_dl(from + proc_slots + i64::from(a1) + 1)
}

/// Granted UL slots usable in the current period.
pub fn ul_slots_per_period(p_rem: u64, bi_ul: u64, pattern: &TddPattern) -> Result<u64> {
    if p_rem == 0 || bi_ul == 0 {
        return Err(Error::config("need positive remaining bytes and slot capacity"));
    }
    Ok(ceil_div(p_rem, bi_ul).min(u64::from(pattern.total_slots - pattern.dl_slots)))
}

/// Last slot used when `bytes` are sent at `cap` per slot over consecutive
/// slots of one direction, starting in slot `start` of that direction.
pub(crate) fn drain_end(pattern: &TddPattern, start: i64, bytes: u64, cap: u64, uplink: bool) -> i64 {
    if pattern.duplexing != Duplexing::TddCommon {
        return start + ceil_div(bytes, cap) as i64 - 1;
    }
    let t = i64::from(pattern.total_slots);
    let d = i64::from(pattern.dl_slots);
    let (run_last, gap) = if uplink { (t - 1, d) } else { (d - 1, t - d) };
    let mut pos = start;
    let mut rem = bytes;
    loop {
        let run_left = (run_last - pos.rem_euclid(t) + 1) as u64;
        let n = ceil_div(rem, cap).min(run_left);
        if n * cap >= rem {
            return pos + n as i64 - 1;
        }
        rem -= n * cap;
        pos += run_left as i64 + gap;
    }
}

/// One SR and the initial grant it produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Flow {
    pub sr: i64,
    pub grant: i64,
    pub pusch: i64,
}

pub(crate) struct SrChain {
    pub flows: Vec<Flow>,
    pub k2: i64,
}

/// The first SR opportunity at or after `ready` and the grant it produces.
pub(crate) fn first_flow(ev: &Evaluator, dr: &ProcessingProfile, ready: i64) -> Result<(Flow, i64)> {
    let k2 = ev.k2(dr)?;
    let c = slots_ceil(ev.w2 + dr.p1, ev.slot);
    Ok((flow_at(ev, c, k2, ev.schedule().next_at_or_after(ready)), k2))
}

#[inline]
fn flow_at(ev: &Evaluator, proc_slots: i64, k2: i64, sr: i64) -> Flow {
    let pattern = &ev.cfg.pattern;
    let grant = grant_slot(pattern, sr, proc_slots, ev.cfg.ctrl.advance_slots);
    Flow {
        sr,
        grant,
        pusch: pattern.next_ul(grant + k2),
    }
}

/// Every SR the UE sends before the first grant reaches it, starting from
/// the first opportunity at or after `ready`.
pub(crate) fn sr_chain(ev: &Evaluator, dr: &ProcessingProfile, ready: i64) -> Result<SrChain> {
    let (first, k2) = first_flow(ev, dr, ready)?;
    let c = slots_ceil(ev.w2 + dr.p1, ev.slot);
    let sched = ev.schedule();
    let mut flows = vec![first];
    if ev.cfg.pattern.duplexing == Duplexing::TddCommon {
        loop {
            let next = sched.next_at_or_after(flows.last().unwrap().sr + 1);
            if next >= first.grant {
                break;
            }
            flows.push(flow_at(ev, c, k2, next));
        }
    }
    Ok(SrChain { flows, k2 })
}

/// Slot of the large grant and its first PUSCH for a BSR sent in slot `x`.
pub(crate) fn bsr_grant(ev: &Evaluator, dr: &ProcessingProfile, x: i64, k2: i64) -> (i64, i64) {
    let pattern = &ev.cfg.pattern;
    let g = grant_slot(pattern, x + 1, slots_ceil(dr.p1, ev.slot), ev.cfg.ctrl.advance_slots);
    (g, pattern.next_ul(g + ev.k2_prime(dr, k2)))
}

fn flow_breakdown(ev: &Evaluator, dr: &ProcessingProfile, o1: f64, f: &Flow) -> LatencyBreakdown {
    let s = ev.slot;
    LatencyBreakdown::default()
        .with(C::W1, f.sr as f64 * s - o1)
        .with(C::W2, ev.w2)
        .with(C::W3, (f.grant - f.sr) as f64 * s)
        .with(C::W4, ev.w4)
        .with(C::W5, (f.pusch - f.grant) as f64 * s)
        .with(C::W6, s)
        .with(C::W7, dr.p4)
}

fn finish(mut b: LatencyBreakdown, parts: &[C]) -> LatencyBreakdown {
    b.total = b.sum_of(parts);
    b
}

const SIZE1: [C; 5] = [C::W1, C::W3, C::W5, C::W6, C::W7];
const SIZE2: [C; 8] = [C::W1, C::W3, C::W5, C::W6, C::W3Prime, C::W5Prime, C::W6Prime, C::W7];

/// Dispatch on packet size and SR count.
pub(crate) fn latency(ev: &Evaluator, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    dr.check_radio(ev.cfg.ctrl.advance_slots, ev.slot)?;
    let ready = ready_slot(o1, dr.l1, ev.slot);
    let g_i = ev.cfg.ctrl.initial_grant_bytes;
    if size <= g_i {
        let (f, _) = first_flow(ev, dr, ready)?;
        return Ok(finish(flow_breakdown(ev, dr, o1, &f), &SIZE1));
    }
    let chain = sr_chain(ev, dr, ready)?;
    let m = chain.flows.len() as u64;
    if size <= m * g_i {
        let idx = (ceil_div(size, g_i.max(1)) - 1) as usize;
        return Ok(finish(flow_breakdown(ev, dr, o1, &chain.flows[idx]), &SIZE1));
    }
    let f0 = chain.flows[0];
    let (g, u) = bsr_grant(ev, dr, f0.pusch, chain.k2);
    let z = drain_end(&ev.cfg.pattern, u, size - m * g_i, ev.ul_capacity()?, true);
    let s = ev.slot;
    let b = flow_breakdown(ev, dr, o1, &f0)
        .with(C::W3Prime, (g - (f0.pusch + 1)) as f64 * s)
        .with(C::W5Prime, (u - g) as f64 * s)
        .with(C::W6Prime, (z + 1 - u) as f64 * s);
    Ok(finish(b, &SIZE2))
}

/// Size-1 packet: fits in the initial grant.
pub fn ul_latency_size1(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64) -> Result<LatencyBreakdown> {
    let ev = ul_evaluator(cfg)?;
    dr.check()?;
    dr.check_radio(cfg.ctrl.advance_slots, ev.slot)?;
    let chain = sr_chain(&ev, dr, ready_slot(o1, dr.l1, ev.slot))?;
    Ok(finish(flow_breakdown(&ev, dr, o1, &chain.flows[0]), &SIZE1))
}

/// Wait offsets (from `o1`) of every SR sent before the first grant, and their count.
pub fn repeated_sr_starts(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64) -> Result<(Vec<f64>, usize)> {
    let ev = ul_evaluator(cfg)?;
    dr.check_radio(cfg.ctrl.advance_slots, ev.slot)?;
    let chain = sr_chain(&ev, dr, ready_slot(o1, dr.l1, ev.slot))?;
    let w1: Vec<f64> = chain.flows.iter().map(|f| f.sr as f64 * ev.slot - o1).collect();
    let n = w1.len();
    Ok((w1, n))
}

/// Size-2 packet with a single SR before the grant.
pub fn ul_latency_size2_single_sr(
    cfg: &SystemConfig,
    dr: &ProcessingProfile,
    o1: f64,
    size: u64,
) -> Result<LatencyBreakdown> {
    if size < cfg.ctrl.initial_grant_bytes {
        return Err(Error::config("size-2 path needs P >= g_I"));
    }
    let (_, n) = repeated_sr_starts(cfg, dr, o1)?;
    if n != 1 {
        return Err(Error::config(format!("{n} SRs precede the grant; use the multi-SR path")));
    }
    ul_latency(cfg, dr, o1, size)
}

/// Size-2 packet with `sr_num >= 2` SRs before the grant.
pub fn ul_latency_size2_multi_sr(
    cfg: &SystemConfig,
    dr: &ProcessingProfile,
    o1: f64,
    size: u64,
    w1: &[f64],
    sr_num: usize,
) -> Result<LatencyBreakdown> {
    if sr_num < 2 || w1.len() != sr_num {
        return Err(Error::config("multi-SR path needs at least two SR start offsets"));
    }
    let (expected, _) = repeated_sr_starts(cfg, dr, o1)?;
    if expected.len() != sr_num || expected.iter().zip(w1).any(|(a, b)| (a - b).abs() > 1e-9) {
        return Err(Error::config("SR start offsets do not match the configuration"));
    }
    ul_latency(cfg, dr, o1, size)
}

pub fn ul_latency(cfg: &SystemConfig, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    ul_evaluator(cfg)?.evaluate(dr, o1, size)
}
