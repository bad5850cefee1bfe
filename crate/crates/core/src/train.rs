//! Packet trains on the grant-based uplink: one shared RLC buffer, FIFO
//! service, SR only when a packet lands in an idle buffer.
//!
//! Event order inside slot `x`: packets with `o1 <= x*S` join the buffer,
//! then the PUSCH of slot `x` is assembled from whatever grants point there,
//! then the BSR (buffer left after assembly minus bytes already granted in
//! later slots) may produce a large grant.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

use crate::breakdown::{Component as C, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::eval::{Evaluator, Mode};
use crate::model::SystemConfig;
use crate::profile::ProcessingProfile;
use crate::slot::{ceil_div, ready_slot, slots_ceil};
use crate::traffic::PacketTrace;
use crate::uplink::{bsr_grant, sr_chain};

/// Where a buffered byte is in its life.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum ByteState {
    /// In the buffer, not yet requested.
    Idle,
    /// Covered by an SR.
    Requested,
    /// Reported in a BSR.
    Reported,
    /// Sent on PUSCH.
    Sent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SlotRecord {
    pub slot: i64,
    pub initial_bytes: u64,
    pub large_bytes: u64,
    pub served: u64,
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub results: Vec<Result<LatencyBreakdown>>,
    pub slots: Vec<SlotRecord>,
    /// Bytes that ever entered each [`ByteState`], indexed by `state as usize`.
    pub entered: [u64; 4],
}

#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct GrantSlot {
    pub initial: u64,
    pub large: u64,
}

struct Queued {
    idx: usize,
    left: u64,
    state: ByteState,
}

struct Chain {
    draw: ProcessingProfile,
    k2: i64,
}

pub(crate) fn check_inputs(ev: &Evaluator, draws: &[ProcessingProfile], trace: &PacketTrace) -> Result<()> {
    if ev.mode() != Mode::UL {
        return Err(Error::config("packet trains need the grant-based uplink"));
    }
    if draws.len() < trace.len() {
        return Err(Error::config(format!(
            "{} profile draws for {} packets",
            draws.len(),
            trace.len()
        )));
    }
    if !trace.is_sorted() {
        return Err(Error::config("trace arrivals must be sorted"));
    }
    for p in &trace.packets {
        if p.size_bytes == 0 || !(p.arrival_ms.is_finite() && p.arrival_ms >= 0.0) {
            return Err(Error::config(format!("invalid packet {p:?}")));
        }
    }
    Ok(())
}

/// Latency of every packet of `trace`; packet `i` uses `draws[i]`, and all
/// UE/gNB timings of a busy period follow the packet that triggered its SR.
pub fn packet_train_latency(
    cfg: &SystemConfig,
    draws: &[ProcessingProfile],
    trace: &PacketTrace,
) -> Result<Vec<Result<LatencyBreakdown>>> {
    let ev = Evaluator::new(cfg, Mode::UL)?;
    Ok(run_packet_train(&ev, draws, trace)?.results)
}

pub fn run_packet_train(ev: &Evaluator, draws: &[ProcessingProfile], trace: &PacketTrace) -> Result<TrainRun> {
    check_inputs(ev, draws, trace)?;
    let s = ev.slot;
    let pattern = ev.cfg.pattern;
    let g_i = ev.cfg.ctrl.initial_grant_bytes;
    let end = ev.ul_end_fraction();
    let pk = &trace.packets;
    let n = pk.len();

    let mut grants: BTreeMap<i64, GrantSlot> = BTreeMap::new();
    let mut buf: VecDeque<Queued> = VecDeque::new();
    let mut totals: Vec<Option<Result<f64>>> = vec![None; n];
    let mut sr_slot: Vec<Option<i64>> = vec![None; n];
    let mut period_of: Vec<usize> = vec![usize::MAX; n];
    let mut period_sizes: Vec<usize> = Vec::new();
    let mut chain: Option<Chain> = None;
    let mut slots = Vec::new();
    let mut entered = [0u64; 4];
    let mut next = 0;
    // Bytes in `buf` and in `grants`.
    let mut buffered = 0u64;
    let mut pending = 0u64;

    loop {
        let next_grant = grants.keys().next().copied();
        let admit = match (next < n, next_grant) {
            (false, None) => break,
            (true, None) => true,
            (true, Some(x)) => slots_ceil(pk[next].arrival_ms, s) <= x,
            (false, Some(_)) => false,
        };
        if admit {
            let i = next;
            next += 1;
            let p = pk[i];
            if buf.is_empty() && grants.is_empty() {
                let dr = draws[i];
                let started = dr
                    .check_radio(ev.cfg.ctrl.advance_slots, s)
                    .and_then(|_| sr_chain(ev, &dr, ready_slot(p.arrival_ms, dr.l1, s)));
                let c = match started {
                    Ok(c) => c,
                    Err(e) => {
                        totals[i] = Some(Err(e));
                        continue;
                    }
                };
                for f in &c.flows {
                    grants.entry(f.pusch).or_default().initial += g_i;
                    pending += g_i;
                }
                sr_slot[i] = Some(c.flows[0].sr);
                chain = Some(Chain { draw: dr, k2: c.k2 });
                period_sizes.push(0);
                entered[ByteState::Idle as usize] += p.size_bytes;
                entered[ByteState::Requested as usize] += p.size_bytes;
                buf.push_back(Queued {
                    idx: i,
                    left: p.size_bytes,
                    state: ByteState::Requested,
                });
            } else {
                entered[ByteState::Idle as usize] += p.size_bytes;
                buf.push_back(Queued {
                    idx: i,
                    left: p.size_bytes,
                    state: ByteState::Idle,
                });
            }
            buffered += p.size_bytes;
            period_of[i] = period_sizes.len() - 1;
            *period_sizes.last_mut().expect("a busy period is open") += 1;
            continue;
        }

        let x = next_grant.expect("grant slot pending");
        let g = grants.remove(&x).expect("grant slot pending");
        let mut cap = g.initial + g.large;
        pending -= cap;
        let mut served = 0;
        while cap > 0 {
            let Some(front) = buf.front_mut() else { break };
            let take = front.left.min(cap);
            front.left -= take;
            cap -= take;
            served += take;
            buffered -= take;
            entered[ByteState::Sent as usize] += take;
            if front.left == 0 {
                let q = buf.pop_front().expect("front exists");
                let o1 = pk[q.idx].arrival_ms;
                totals[q.idx] = Some(Ok((x as f64 + end) * s + draws[q.idx].p4 - o1));
            }
        }
        slots.push(SlotRecord {
            slot: x,
            initial_bytes: g.initial,
            large_bytes: g.large,
            served,
        });

        // Newly reported bytes sit at the back of the queue.
        for q in buf.iter_mut().rev() {
            if q.state == ByteState::Reported {
                break;
            }
            q.state = ByteState::Reported;
            entered[ByteState::Reported as usize] += q.left;
        }
        let (remaining, future) = (buffered, pending);
        if remaining > future {
            let ch = chain.as_ref().expect("buffered bytes imply an SR chain");
            let bi = ev.ul_capacity()?;
            let (_, u) = bsr_grant(ev, &ch.draw, x, ch.k2);
            place_large_grants(&mut grants, &pattern, u, remaining - future, bi);
            pending = remaining;
        }
    }

    for q in buf {
        totals[q.idx] = Some(Err(Error::config("packet left in the buffer")));
    }

    let results = totals
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            let total = t.unwrap_or_else(|| Err(Error::config("packet never served")))?;
            let p = pk[i];
            let dr = &draws[i];
            let alone = sr_slot[i].is_some() && period_sizes[period_of[i]] == 1;
            if alone {
                if let Ok(mut b) = ev.evaluate(dr, p.arrival_ms, p.size_bytes) {
                    b.total = total;
                    return Ok(b);
                }
            }
            let mut b = LatencyBreakdown::default().with(C::W7, dr.p4);
            if let Some(sr) = sr_slot[i] {
                b.set(C::W1, sr as f64 * s - p.arrival_ms);
            }
            b.total = total;
            Ok(b)
        })
        .collect();
    Ok(TrainRun {
        results,
        slots,
        entered,
    })
}

/// `bytes` of large grants, at most `bi` per slot, on UL slots from `from`
/// that do not already hold one.
pub(crate) fn place_large_grants(
    grants: &mut BTreeMap<i64, GrantSlot>,
    pattern: &crate::model::TddPattern,
    from: i64,
    bytes: u64,
    bi: u64,
) {
    let mut left = bytes;
    let mut y = from;
    let mut slots = ceil_div(bytes, bi);
    while slots > 0 {
        y = pattern.next_ul(y);
        let e = grants.entry(y).or_default();
        if e.large == 0 {
            e.large = left.min(bi);
            left -= e.large;
            slots -= 1;
        }
        y += 1;
    }
}
