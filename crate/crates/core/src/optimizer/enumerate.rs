use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::space::{Point, SearchSpace, STANDARD_PERIODS_MS};
use crate::error::Result;
use crate::model::{SlotGrid, TddPattern, SYMBOLS_PER_SLOT};
use crate::slot::slots_ceil;
use crate::sr::schedule_slot_set;
use crate::tables::RateTables;

/// Whether monotone parameters are pinned to their fastest valid value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pinning {
    /// Every valid combination.
    None,
    /// Shortest PUCCH end, one PDCCH symbol, smallest feasible `a1`.
    Monotone,
}

/// The valid part of one `(slot, period, dl_slots)` cell. Every combination
/// of its lists is valid as long as `k2 >= k2_min[pdcch]`.
#[derive(Debug, Clone)]
pub(crate) struct Block {
    pub slot_ms: f64,
    pub period: u32,
    pub dl_slots: u32,
    pub k2: Vec<u32>,
    pub sr: Vec<(u32, u32)>,
    pub pucch: Vec<(u32, u32)>,
    /// `(pdcch, k2_min)`.
    pub pdcch: Vec<(u32, u32)>,
    pub advance: Vec<u32>,
}

impl Block {
    pub fn count(&self) -> u64 {
        let k2_pdcch: u64 = self
            .k2
            .iter()
            .map(|&k| self.pdcch.iter().filter(|&&(_, m)| k >= m).count() as u64)
            .sum();
        k2_pdcch * (self.sr.len() * self.pucch.len() * self.advance.len()) as u64
    }

    fn point(&self, k2: u32, sr: (u32, u32), pucch: (u32, u32), pdcch: u32, a1: u32) -> Point {
        Point {
            slot_ms: self.slot_ms,
            period: self.period,
            dl_slots: self.dl_slots,
            k2,
            sr_period: sr.0,
            sr_offset: sr.1,
            pucch_start: pucch.0,
            pucch_symbols: pucch.1,
            pdcch_symbols: pdcch,
            advance_slots: a1,
        }
    }

    /// Points in canonical order.
    pub fn for_each(&self, mut f: impl FnMut(Point)) {
        for &k2 in &self.k2 {
            for &sr in &self.sr {
                for &uc in &self.pucch {
                    for &(dc, min) in &self.pdcch {
                        if k2 < min {
                            continue;
                        }
                        for &a1 in &self.advance {
                            f(self.point(k2, sr, uc, dc, a1));
                        }
                    }
                }
            }
        }
    }

    /// Uniform draw from the block by rejection on the `k2`/PDCCH coupling.
    fn sample(&self, rng: &mut impl Rng) -> Point {
        loop {
            let k2 = self.k2[rng.gen_range(0..self.k2.len())];
            let (dc, min) = self.pdcch[rng.gen_range(0..self.pdcch.len())];
            if k2 < min {
                continue;
            }
            let sr = self.sr[rng.gen_range(0..self.sr.len())];
            let uc = self.pucch[rng.gen_range(0..self.pucch.len())];
            let a1 = self.advance[rng.gen_range(0..self.advance.len())];
            return self.point(k2, sr, uc, dc, a1);
        }
    }
}

pub(crate) fn is_standard_period(period: u32, slot_ms: f64) -> bool {
    let ms = f64::from(period) * slot_ms;
    STANDARD_PERIODS_MS.iter().any(|p| (p - ms).abs() < 1e-9)
}

/// Minimum `k2` for a UE that needs `l2` ms after a PDCCH of `pdcch` symbols.
pub(crate) fn k2_min(slot_ms: f64, pdcch: u32, l2: f64) -> u32 {
    let w4 = f64::from(pdcch) * slot_ms / f64::from(SYMBOLS_PER_SLOT);
    slots_ceil(w4 + l2, slot_ms).max(0) as u32
}

pub(crate) fn blocks(space: &SearchSpace, pin: Pinning) -> Vec<Block> {
    let prof = space.nominal_profile();
    let tables = RateTables::standard();
    let mut out = Vec::new();
    for &s in &space.slot_duration {
        let Ok(grid) = SlotGrid::from_slot_ms(s) else { continue };
        if grid.check_range(space.frequency_range).is_err() {
            continue;
        }
        let Ok(mcs) = tables.mcs(space.link.mcs_index) else { continue };
        if tables.n_rb(space.link.bandwidth_mhz, grid.numerology).is_err() || mcs.qm == 0 {
            continue;
        }
        let mut advance: Vec<u32> = space
            .in_advance_submission
            .iter()
            .copied()
            .filter(|&a| prof.check_radio(a, s).is_ok())
            .collect();
        let mut pucch: Vec<(u32, u32)> = space
            .pucch_st_sym
            .iter()
            .flat_map(|&st| space.pucch_nof_sym.iter().map(move |&no| (st, no)))
            .filter(|&(st, no)| no >= 1 && st + no <= SYMBOLS_PER_SLOT)
            .collect();
        let mut pdcch: Vec<(u32, u32)> = space
            .pdcch_nof_sym
            .iter()
            .copied()
            .filter(|dc| (1..=3).contains(dc))
            .map(|dc| (dc, k2_min(s, dc, prof.l2)))
            .collect();
        if pin == Pinning::Monotone {
            advance.truncate(1);
            if let Some(&best) = pucch.iter().min_by_key(|&&(st, no)| (st + no, st)) {
                pucch = vec![best];
            }
            pdcch.truncate(1);
        }
        if advance.is_empty() || pucch.is_empty() || pdcch.is_empty() {
            continue;
        }
        for &t in &space.dl_ul_tx_period {
            if !is_standard_period(t, s) {
                continue;
            }
            for &d in &space.nof_dl_slots {
                if !(1..t).contains(&d) {
                    continue;
                }
                let pattern = TddPattern::common(t, d);
                let sr: Vec<(u32, u32)> = space
                    .sr_period
                    .iter()
                    .flat_map(|&p| space.sr_offset.iter().map(move |&o| (p, o)))
                    .filter(|&(p, o)| {
                        crate::model::SR_PERIODS.contains(&p)
                            && o < p
                            && !schedule_slot_set(&pattern, p, o).is_empty()
                    })
                    .collect();
                if sr.is_empty() {
                    continue;
                }
                let block = Block {
                    slot_ms: s,
                    period: t,
                    dl_slots: d,
                    k2: space.k2.clone(),
                    sr,
                    pucch: pucch.clone(),
                    pdcch: pdcch.clone(),
                    advance: advance.clone(),
                };
                if block.count() > 0 {
                    out.push(block);
                }
            }
        }
    }
    out
}

/// Every configuration passing the pruning predicates, in canonical order.
pub fn enumerate_valid(space: &SearchSpace, pin: Pinning) -> Vec<Point> {
    let mut v = Vec::new();
    for b in blocks(space, pin) {
        b.for_each(|p| v.push(p));
    }
    v
}

pub fn count_valid(space: &SearchSpace, pin: Pinning) -> u64 {
    blocks(space, pin).iter().map(Block::count).sum()
}

/// `n` distinct valid points drawn uniformly (fewer if the space is smaller),
/// in canonical order.
pub fn sample_valid(space: &SearchSpace, pin: Pinning, n: usize, seed: u64) -> Vec<Point> {
    let blocks = blocks(space, pin);
    let counts: Vec<u64> = blocks.iter().map(Block::count).collect();
    let total: u64 = counts.iter().sum();
    if total as u128 <= n as u128 {
        return enumerate_valid(space, pin);
    }
    let mut cum = Vec::with_capacity(counts.len());
    let mut acc = 0;
    for c in &counts {
        acc += c;
        cum.push(acc);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::with_capacity(n);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let r = rng.gen_range(0..total);
        let b = cum.partition_point(|&c| c <= r);
        let p = blocks[b].sample(&mut rng);
        if seen.insert(p.key()) {
            out.push(p);
        }
    }
    out.sort_by_key(Point::key);
    out
}

/// Independent re-check of every pruning predicate for one point.
pub fn is_valid(space: &SearchSpace, p: &Point) -> Result<bool> {
    let prof = space.nominal_profile();
    let Ok(grid) = SlotGrid::from_slot_ms(p.slot_ms) else { return Ok(false) };
    let cfg = space.config(p)?;
    let ok = grid.check_range(space.frequency_range).is_ok()
        && is_standard_period(p.period, p.slot_ms)
        && p.dl_slots >= 1
        && p.dl_slots < p.period
        && cfg.validate().is_ok()
        && !crate::sr::schedule_slot_set_oracle(&cfg.pattern, p.sr_period, p.sr_offset).is_empty()
        && prof.check_radio(p.advance_slots, p.slot_ms).is_ok()
        && p.k2 >= k2_min(p.slot_ms, p.pdcch_symbols, prof.l2)
        && crate::eval::Evaluator::new(&cfg, space.mode()).is_ok_and(|ev| ev.ul_capacity().is_ok());
    Ok(ok)
}
