//! Brute-force reference timeline. Walks slot by slot and tests every slot
//! against the raw pattern and schedule definitions; no eligible-set solver,
//! no modular jumps, no closed-form drains.

use std::collections::{BTreeMap, VecDeque};

use crate::breakdown::{Component as C, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::eval::{Access, Direction, Evaluator, Mode};
use crate::model::{Duplexing, SrBound, SystemConfig, TddPattern, SYMBOLS_PER_SLOT};
use crate::profile::ProcessingProfile;
use crate::slot::{ready_slot, slots_ceil};
use crate::traffic::PacketTrace;

/// Upper bound on slots walked for a single search.
const HORIZON: i64 = 1 << 22;

fn residue(p: &TddPattern, n: i64) -> i64 {
    n.rem_euclid(i64::from(p.total_slots))
}

fn dl_capable(p: &TddPattern, n: i64) -> bool {
    p.duplexing != Duplexing::TddCommon || residue(p, n) < i64::from(p.dl_slots)
}

fn ul_capable(p: &TddPattern, n: i64) -> bool {
    p.duplexing != Duplexing::TddCommon || residue(p, n) >= i64::from(p.dl_slots)
}

/// UL slot that may carry PUCCH (or a pre-configured grant) for this schedule.
fn occasion(p: &TddPattern, period: u32, offset: u32, n: i64) -> bool {
    if (n - i64::from(offset)).rem_euclid(i64::from(period)) != 0 {
        return false;
    }
    match (p.duplexing, p.sr_bound) {
        (Duplexing::TddCommon, SrBound::Canonical) => residue(p, n) >= i64::from(p.dl_slots),
        (Duplexing::TddCommon, SrBound::SkipFirstUl) => residue(p, n) > i64::from(p.dl_slots),
        _ => true,
    }
}

fn first_from(start: i64, pred: impl Fn(i64) -> bool) -> Result<i64> {
    (start..start + HORIZON)
        .find(|&n| pred(n))
        .ok_or(Error::UnreachableSr)
}

struct Timing {
    s: f64,
    w2: f64,
    w4: f64,
    end_ul: f64,
    end_dl: f64,
}

impl Timing {
    fn new(cfg: &SystemConfig) -> Self {
        let s = cfg.slot_ms();
        let sym = s / f64::from(SYMBOLS_PER_SLOT);
        let (end_ul, end_dl) = match (cfg.pattern.duplexing, &cfg.pattern.mini_slot) {
            (Duplexing::TddMiniSlot, Some(m)) => (
                f64::from(m.sy_l_ul) / f64::from(SYMBOLS_PER_SLOT),
                f64::from(m.sy_l_dl) / f64::from(SYMBOLS_PER_SLOT),
            ),
            _ => (1.0, 1.0),
        };
        Timing {
            s,
            w2: f64::from(cfg.ctrl.pucch_start + cfg.ctrl.pucch_symbols) * sym,
            w4: f64::from(cfg.ctrl.pdcch_symbols) * sym,
            end_ul,
            end_dl,
        }
    }
}

/// Same contract as the packet-train simulation for the grant-based uplink;
/// downlink and grant-free packets are walked one at a time.
pub fn simulate_slot_timeline(
    cfg: &SystemConfig,
    mode: Mode,
    draws: &[ProcessingProfile],
    trace: &PacketTrace,
) -> Result<Vec<Result<LatencyBreakdown>>> {
    // Reuses only the mode/config admission checks.
    let ev = Evaluator::new(cfg, mode)?;
    if draws.len() < trace.len() {
        return Err(Error::config("fewer profile draws than packets"));
    }
    match (mode.direction, mode.access) {
        (Direction::Uplink, Access::GrantBased) => {
            crate::train::check_inputs(&ev, draws, trace)?;
            uplink_train(cfg, ev.ul_capacity(), draws, trace)
        }
        (Direction::Uplink, Access::GrantFree) => Ok(trace
            .packets
            .iter()
            .zip(draws)
            .map(|(p, dr)| grant_free(cfg, ev.ul_capacity(), dr, p.arrival_ms, p.size_bytes))
            .collect()),
        (Direction::Downlink, _) => Ok(trace
            .packets
            .iter()
            .zip(draws)
            .map(|(p, dr)| downlink(cfg, ev.dl_capacity(), dr, p.arrival_ms, p.size_bytes))
            .collect()),
    }
}

fn grant_free(cfg: &SystemConfig, cap: Result<u64>, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    let t = Timing::new(cfg);
    let cap = cap?;
    let gf = cfg.grant_free_schedule();
    let p = &cfg.pattern;
    let mut n = ready_slot(o1, dr.l1, t.s);
    let mut left = size;
    loop {
        n = first_from(n, |k| occasion(p, gf.period, gf.offset, k))?;
        left = left.saturating_sub(cap);
        if left == 0 {
            break;
        }
        n += 1;
    }
    let mut b = LatencyBreakdown::default().with(C::W7, dr.p4);
    b.total = (n as f64 + t.end_ul) * t.s + dr.p4 - o1;
    Ok(b)
}

fn downlink(cfg: &SystemConfig, cap: Result<u64>, dr: &ProcessingProfile, o1: f64, size: u64) -> Result<LatencyBreakdown> {
    let t = Timing::new(cfg);
    dr.check_radio(cfg.ctrl.advance_slots, t.s)?;
    let cap = cap?;
    let p = &cfg.pattern;
    let ready = slots_ceil(o1 + dr.p5, t.s);
    let mut n = ready + i64::from(cfg.ctrl.advance_slots) + 1;
    let mut left = size;
    loop {
        n = first_from(n, |k| dl_capable(p, k))?;
        left = left.saturating_sub(cap);
        if left == 0 {
            break;
        }
        n += 1;
    }
    let mut b = LatencyBreakdown::default().with(C::U4, dr.l3);
    b.total = (n as f64 + t.end_dl) * t.s + dr.l3 - o1;
    Ok(b)
}

struct SrProcess {
    ready: i64,
    first_grant: Option<i64>,
    sent: usize,
}

#[derive(Default)]
struct Slot {
    initial: u64,
    large: u64,
}

fn uplink_train(
    cfg: &SystemConfig,
    cap: Result<u64>,
    draws: &[ProcessingProfile],
    trace: &PacketTrace,
) -> Result<Vec<Result<LatencyBreakdown>>> {
    let t = Timing::new(cfg);
    let s = t.s;
    let p = &cfg.pattern;
    let ctrl = &cfg.ctrl;
    let a1 = i64::from(ctrl.advance_slots);
    let g_i = ctrl.initial_grant_bytes;
    let repeat = p.duplexing == Duplexing::TddCommon;
    let pk = &trace.packets;

    let mut out: Vec<Option<Result<LatencyBreakdown>>> = vec![None; pk.len()];
    let mut buf: VecDeque<(usize, u64)> = VecDeque::new();
    let mut grants: BTreeMap<i64, Slot> = BTreeMap::new();
    let mut sr: Option<SrProcess> = None;
    // draw and k2 of the packet that opened the current busy period
    let mut chain: Option<(ProcessingProfile, i64)> = None;
    let mut next = 0;
    let mut n = match pk.first() {
        Some(first) => slots_ceil(first.arrival_ms, s),
        None => return Ok(Vec::new()),
    };

    loop {
        let idle = buf.is_empty() && grants.range(n..).next().is_none() && sr.is_none();
        if idle {
            if next == pk.len() {
                break;
            }
            n = n.max(slots_ceil(pk[next].arrival_ms, s));
        }

        while next < pk.len() && slots_ceil(pk[next].arrival_ms, s) <= n {
            let i = next;
            next += 1;
            let pkt = pk[i];
            let quiet = buf.is_empty() && grants.range(n..).next().is_none() && sr.is_none();
            if quiet {
                let dr = draws[i];
                let k2_min = slots_ceil(t.w4 + dr.l2, s);
                let k2 = match ctrl.k2_override.map(i64::from) {
                    Some(k) if k < k2_min => Err(Error::config("k2 override below the UE minimum")),
                    Some(k) => Ok(k),
                    None => Ok(k2_min),
                };
                match dr.check_radio(ctrl.advance_slots, s).and(k2) {
                    Ok(k2) => {
                        chain = Some((dr, k2));
                        sr = Some(SrProcess {
                            ready: ready_slot(pkt.arrival_ms, dr.l1, s),
                            first_grant: None,
                            sent: 0,
                        });
                        buf.push_back((i, pkt.size_bytes));
                    }
                    Err(e) => out[i] = Some(Err(e)),
                }
            } else {
                buf.push_back((i, pkt.size_bytes));
            }
        }

        if let Some(proc_) = &mut sr {
            let (dr, k2) = chain.expect("SR process has a chain");
            if proc_.first_grant.is_some_and(|g| n >= g) {
                sr = None;
            } else if n >= proc_.ready
                && occasion(p, ctrl.sr_period, ctrl.sr_offset, n)
                && (repeat || proc_.sent == 0)
            {
                let c = slots_ceil(t.w2 + dr.p1, s);
                let g = first_from(n + c + a1 + 1, |k| dl_capable(p, k))?;
                let u = first_from(g + k2, |k| ul_capable(p, k))?;
                grants.entry(u).or_default().initial += g_i;
                proc_.first_grant.get_or_insert(g);
                proc_.sent += 1;
                if !repeat {
                    sr = None;
                }
            } else if n - proc_.ready > HORIZON {
                return Err(Error::UnreachableSr);
            }
        }

        if let Some(g) = grants.remove(&n) {
            let mut room = g.initial + g.large;
            while room > 0 {
                let Some(front) = buf.front_mut() else { break };
                let take = front.1.min(room);
                front.1 -= take;
                room -= take;
                if front.1 == 0 {
                    let (i, _) = buf.pop_front().expect("front exists");
                    let o1 = pk[i].arrival_ms;
                    let mut b = LatencyBreakdown::default().with(C::W7, draws[i].p4);
                    b.total = (n as f64 + t.end_ul) * s + draws[i].p4 - o1;
                    out[i] = Some(Ok(b));
                }
            }
            let left: u64 = buf.iter().map(|q| q.1).sum();
            let granted: u64 = grants.range(n + 1..).map(|(_, g)| g.initial + g.large).sum();
            if left > granted {
                let (dr, k2) = chain.expect("buffered bytes imply a chain");
                let bi = cap.clone()?;
                let bsr_proc = slots_ceil(dr.p1, s);
                let g2 = first_from(n + 1 + bsr_proc + a1 + 1, |k| dl_capable(p, k))?;
                let k2p = slots_ceil(t.w4 + dr.l2_prime, s).max(k2);
                let mut y = first_from(g2 + k2p, |k| ul_capable(p, k))?;
                let mut need = left - granted;
                while need > 0 {
                    if ul_capable(p, y) {
                        let e = grants.entry(y).or_default();
                        if e.large == 0 {
                            e.large = need.min(bi);
                            need -= e.large;
                        }
                    }
                    y += 1;
                }
            }
        }
        n += 1;
    }

    Ok(out
        .into_iter()
        .map(|r| r.unwrap_or_else(|| Err(Error::config("packet never served"))))
        .collect())
}
