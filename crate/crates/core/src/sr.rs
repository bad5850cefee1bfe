//! SR-eligible slots and the wait until the next one.
//!
//! An SR (or a pre-configured grant) can go out in slot `O + k*P`. We want the
//! `k` (mod T) whose slot lands in the UL part of the pattern. With
//! `n = gcd(P, T)` the landing residue is `O + n*j` for `j` in a contiguous
//! range, and `k = j * (P/n)^-1 mod T/n` (plus multiples of `T/n`), the inverse
//! coming from Euler's theorem.

use num_integer::Integer;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{ControlAndTiming, SystemConfig, TddPattern};
use crate::slot::ready_slot;

/// Eligible SR indices within one pattern cycle.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct SrSlotSet {
    /// Sorted `k` in `1..=T` with `(O + k*P) mod T` in the UL range.
    pub set_a: Vec<u32>,
    /// Sorted distinct UL residues hit by `set_a`.
    pub set_b: Vec<u32>,
}

impl SrSlotSet {
    pub fn is_empty(&self) -> bool {
        self.set_a.is_empty()
    }

    fn from_indices(mut a: Vec<u32>, t: u32, period: u32, offset: u32) -> Self {
        a.sort_unstable();
        a.dedup();
        let mut b: Vec<u32> = a
            .iter()
            .map(|&k| ((u64::from(offset) + u64::from(k) * u64::from(period)) % u64::from(t)) as u32)
            .collect();
        b.sort_unstable();
        b.dedup();
        SrSlotSet { set_a: a, set_b: b }
    }
}

/// Euler's totient by trial division.
pub fn totient(mut m: u64) -> u64 {
    let mut phi = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            phi -= phi / p;
        }
        p += 1;
    }
    if m > 1 {
        phi -= phi / m;
    }
    phi
}

pub fn mod_pow(mut base: u64, mut exp: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % m;
        }
        base = base * base % m;
        exp >>= 1;
    }
    acc
}

/// `a^-1 mod m` via Euler's theorem; `a` must be coprime to `m`.
pub fn inverse_euler(a: u64, m: u64) -> u64 {
    mod_pow(a, totient(m) - 1, m)
}

/// `a^-1 mod m` via the extended Euclidean algorithm.
pub fn inverse_ext_gcd(a: u64, m: u64) -> Option<u64> {
    let eg = (a as i64).extended_gcd(&(m as i64));
    if eg.gcd != 1 {
        return None;
    }
    Some(eg.x.rem_euclid(m as i64) as u64)
}

/// Closed-form eligible set for an arbitrary (period, offset) schedule.
pub fn schedule_slot_set(pattern: &TddPattern, period: u32, offset: u32) -> SrSlotSet {
    let t = i64::from(pattern.total_slots);
    let p = i64::from(period);
    let n = p.gcd(&t);
    let o = i64::from(offset).rem_euclid(t);
    let (lo, hi) = pattern.sr_residue_bounds();
    if lo > hi {
        return SrSlotSet::default();
    }
    let t_red = t / n;
    let inv = inverse_euler(((p / n) % t_red) as u64, t_red as u64) as i64;
    let j_lo = Integer::div_ceil(&(lo - o), &n);
    let j_hi = Integer::div_floor(&(hi - o), &n);
    let mut a = Vec::new();
    for j in j_lo..=j_hi {
        let base = (j * inv).rem_euclid(t_red);
        for i in 0..n {
            let k = base + t_red * i;
            a.push(if k == 0 { t } else { k } as u32);
        }
    }
    SrSlotSet::from_indices(a, pattern.total_slots, period, offset)
}

pub fn sr_slot_set(pattern: &TddPattern, ctrl: &ControlAndTiming) -> SrSlotSet {
    schedule_slot_set(pattern, ctrl.sr_period, ctrl.sr_offset)
}

/// Brute force over one full cycle of SR occasions.
pub fn schedule_slot_set_oracle(pattern: &TddPattern, period: u32, offset: u32) -> SrSlotSet {
    let t = u64::from(pattern.total_slots);
    let p = u64::from(period);
    let cycle = t * p / p.gcd(&t);
    let (lo, hi) = pattern.sr_residue_bounds();
    let a = (1..=cycle)
        .filter(|&k| {
            let r = ((u64::from(offset) + k * p) % t) as i64;
            lo <= r && r <= hi
        })
        .map(|k| ((k - 1) % t + 1) as u32)
        .collect();
    SrSlotSet::from_indices(a, pattern.total_slots, period, offset)
}

pub fn sr_slot_set_oracle(pattern: &TddPattern, ctrl: &ControlAndTiming) -> SrSlotSet {
    schedule_slot_set_oracle(pattern, ctrl.sr_period, ctrl.sr_offset)
}

/// A periodic opportunity schedule with its eligible residues resolved.
#[derive(Debug, Clone)]
pub struct Schedule {
    period: i64,
    offset: i64,
    t: i64,
    /// Eligible `k mod T`, sorted.
    residues: Vec<i64>,
}

impl Schedule {
    pub fn new(pattern: &TddPattern, period: u32, offset: u32) -> Result<Self> {
        let set = schedule_slot_set(pattern, period, offset);
        if set.is_empty() {
            return Err(Error::UnreachableSr);
        }
        let t = i64::from(pattern.total_slots);
        let mut residues: Vec<i64> = set.set_a.iter().map(|&k| i64::from(k) % t).collect();
        residues.sort_unstable();
        Ok(Schedule {
            period: i64::from(period),
            offset: i64::from(offset),
            t,
            residues,
        })
    }

    pub fn for_sr(cfg: &SystemConfig) -> Result<Self> {
        Self::new(&cfg.pattern, cfg.ctrl.sr_period, cfg.ctrl.sr_offset)
    }

    pub fn for_grant_free(cfg: &SystemConfig) -> Result<Self> {
        let gf = cfg.grant_free_schedule();
        Self::new(&cfg.pattern, gf.period, gf.offset)
    }

    /// First eligible slot at or after `slot`.
    ///
    /// With `ready = slot - O` split as `q*(T*P) + r`, the answer is
    /// `O + (m + q*T)*P` for the smallest eligible residue `m` with `m*P >= r`,
    /// wrapping to the next cycle when none qualifies.
    pub fn next_at_or_after(&self, slot: i64) -> i64 {
        let rel = slot - self.offset;
        let cycle = self.t * self.period;
        let q = rel.div_euclid(cycle);
        let r = rel.rem_euclid(cycle);
        let idx = self.residues.partition_point(|&m| m * self.period < r);
        let m = match self.residues.get(idx) {
            Some(&m) => m,
            None => self.t + self.residues[0],
        };
        self.offset + (m + q * self.t) * self.period
    }
}

/// Wait from arrival `o1` until the first SR opportunity the UE can use.
pub fn compute_w1(cfg: &SystemConfig, o1: f64, l1: f64) -> Result<f64> {
    let sched = Schedule::for_sr(cfg)?;
    let s = cfg.slot_ms();
    let slot = sched.next_at_or_after(ready_slot(o1, l1, s));
    Ok(slot as f64 * s - o1)
}
