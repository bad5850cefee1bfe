#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use ranlat::model::SR_PERIODS;
use ranlat::{
    ControlAndTiming, Duplexing, LinkBudget, MiniSlotSplit, ProcessingProfile, SlotGrid,
    SystemConfig, TddPattern,
};

pub const TOL: f64 = 1e-9;

/// 3 DL + 2 UL slots of 0.5 ms, SR every slot, PUCCH in the last symbol.
pub fn e1() -> SystemConfig {
    SystemConfig {
        grid: SlotGrid::new(1).unwrap(),
        pattern: TddPattern::common(5, 3),
        ctrl: ControlAndTiming {
            sr_period: 1,
            sr_offset: 0,
            pucch_start: 13,
            pucch_symbols: 1,
            pdcch_symbols: 1,
            advance_slots: 1,
            k2_override: None,
            initial_grant_bytes: 100,
        },
        link: LinkBudget {
            bandwidth_mhz: 20,
            mcs_index: 20,
        },
        grant_free: None,
    }
}

pub fn e1_profile() -> ProcessingProfile {
    ProcessingProfile {
        l1: 0.2,
        l2: 0.2,
        l2_prime: 0.2,
        l3: 0.3,
        p1: 0.1,
        p2: 0.1,
        p3: 0.01,
        p4: 0.4,
        p5: 0.2,
        r1: 0.5,
    }
}

pub fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

const PERIODS: [u32; 13] = [2, 4, 5, 6, 8, 10, 12, 16, 20, 40, 80, 160, 320];

/// A structurally valid configuration. The SR schedule may be unreachable
/// and the radio budget may not fit; callers skip those.
pub fn random_config<R: Rng>(rng: &mut R) -> SystemConfig {
    let mu = rng.gen_range(0..=2u8);
    let duplexing = *[Duplexing::TddCommon, Duplexing::TddCommon, Duplexing::TddMiniSlot, Duplexing::Fdd]
        .choose(rng)
        .unwrap();
    let t = *PERIODS[..10].choose(rng).unwrap();
    let pattern = match duplexing {
        Duplexing::TddCommon => TddPattern::common(t, rng.gen_range(1..t)),
        Duplexing::TddMiniSlot => {
            let sy_f_dl = rng.gen_range(2..=10);
            let sy_l_dl = rng.gen_range(sy_f_dl..=11);
            let sy_f_ul = rng.gen_range(sy_l_dl + 1..=13);
            let sy_l_ul = rng.gen_range(sy_f_ul + 1..=14);
            TddPattern::mini_slot(
                t,
                MiniSlotSplit {
                    sy_f_dl,
                    sy_l_dl,
                    sy_f_ul,
                    sy_l_ul,
                },
            )
        }
        Duplexing::Fdd => TddPattern::fdd(t),
    };
    let sr_period = *SR_PERIODS[..9].choose(rng).unwrap();
    let (pucch_start, pucch_symbols) = match &pattern.mini_slot {
        Some(m) => {
            let st = rng.gen_range(m.sy_f_ul..=13);
            (st, rng.gen_range(1..=(14 - st).min(3)))
        }
        None => {
            let st = rng.gen_range(0..=13);
            (st, rng.gen_range(1..=(14 - st).min(3)))
        }
    };
    let pdcch_max = pattern.mini_slot.map_or(3, |m| m.sy_l_dl.min(3));
    SystemConfig {
        grid: SlotGrid::new(mu).unwrap(),
        pattern,
        ctrl: ControlAndTiming {
            sr_period,
            sr_offset: rng.gen_range(0..sr_period),
            pucch_start,
            pucch_symbols,
            pdcch_symbols: rng.gen_range(1..=pdcch_max),
            advance_slots: rng.gen_range(0..=4),
            k2_override: if rng.gen_bool(0.3) { Some(rng.gen_range(1..=16)) } else { None },
            initial_grant_bytes: *[16u64, 50, 100, 500].choose(rng).unwrap(),
        },
        link: LinkBudget {
            bandwidth_mhz: *[10u32, 20, 40].choose(rng).unwrap(),
            mcs_index: rng.gen_range(0..=28),
        },
        grant_free: None,
    }
}

pub fn random_profile<R: Rng>(rng: &mut R) -> ProcessingProfile {
    ProcessingProfile {
        l1: rng.gen_range(0.0..3.0),
        l2: rng.gen_range(0.0..1.0),
        l2_prime: rng.gen_range(0.0..1.0),
        l3: rng.gen_range(0.0..1.0),
        p1: rng.gen_range(0.0..0.6),
        p2: rng.gen_range(0.0..0.2),
        p3: rng.gen_range(0.0..0.05),
        p4: rng.gen_range(0.0..1.0),
        p5: rng.gen_range(0.0..0.5),
        r1: rng.gen_range(0.0..0.6),
    }
}

/// Packet sizes around the interesting boundaries of `cfg`.
pub fn random_size<R: Rng>(rng: &mut R, cfg: &SystemConfig) -> u64 {
    let g = cfg.ctrl.initial_grant_bytes;
    match rng.gen_range(0..5) {
        0 => rng.gen_range(1..=g),
        1 => g + rng.gen_range(1..=g),
        2 => rng.gen_range(1..=5 * g),
        3 => rng.gen_range(1..=20_000),
        _ => rng.gen_range(1..=200_000),
    }
}
