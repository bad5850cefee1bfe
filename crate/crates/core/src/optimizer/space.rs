use std::path::Path;

use serde::Serialize;
use serde_yaml::{Mapping, Value};

use crate::error::{Error, Result};
use crate::eval::{Access, Mode};
use crate::model::{
    ControlAndTiming, FrequencyRange, LinkBudget, SlotGrid, SystemConfig, TddPattern,
};
use crate::profile::ProcessingProfile;
use crate::stochastic::{DistSpec, ProfileSpec};
use crate::traffic::TrafficSpec;

const DEFAULT_SPACE: &str = include_str!("../../data/default_space.yaml");

/// DL/UL pattern periods (ms) the standard allows.
pub const STANDARD_PERIODS_MS: [f64; 10] = [0.5, 0.625, 1.0, 1.25, 2.0, 2.5, 3.0, 4.0, 5.0, 10.0];

/// Swept axes in canonical key order.
pub const AXES: [&str; 10] = [
    "slot_duration",
    "dl_ul_tx_period",
    "nof_dl_slots",
    "k2",
    "sr_period",
    "sr_offset",
    "pucch_st_sym",
    "pucch_nof_sym",
    "pdcch_nof_sym",
    "in_advance_submission",
];

/// One point of the search space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Point {
    pub slot_ms: f64,
    pub period: u32,
    pub dl_slots: u32,
    pub k2: u32,
    pub sr_period: u32,
    pub sr_offset: u32,
    pub pucch_start: u32,
    pub pucch_symbols: u32,
    pub pdcch_symbols: u32,
    pub advance_slots: u32,
}

impl Point {
    /// Lexicographic key in canonical axis order.
    pub fn key(&self) -> [u64; 10] {
        [
            self.slot_ms.to_bits(),
            u64::from(self.period),
            u64::from(self.dl_slots),
            u64::from(self.k2),
            u64::from(self.sr_period),
            u64::from(self.sr_offset),
            u64::from(self.pucch_start),
            u64::from(self.pucch_symbols),
            u64::from(self.pdcch_symbols),
            u64::from(self.advance_slots),
        ]
    }
}

impl std::fmt::Display for Point {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "slot_duration={} dl_ul_tx_period={} nof_dl_slots={} k2={} sr_period={} sr_offset={} \
             pucch_st_sym={} pucch_nof_sym={} pdcch_nof_sym={} in_advance_submission={}",
            self.slot_ms,
            self.period,
            self.dl_slots,
            self.k2,
            self.sr_period,
            self.sr_offset,
            self.pucch_start,
            self.pucch_symbols,
            self.pdcch_symbols,
            self.advance_slots
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SearchSpace {
    pub slot_duration: Vec<f64>,
    pub dl_ul_tx_period: Vec<u32>,
    pub nof_dl_slots: Vec<u32>,
    pub k2: Vec<u32>,
    pub sr_period: Vec<u32>,
    pub sr_offset: Vec<u32>,
    pub pucch_st_sym: Vec<u32>,
    pub pucch_nof_sym: Vec<u32>,
    pub pdcch_nof_sym: Vec<u32>,
    pub in_advance_submission: Vec<u32>,
    pub no_mixed_slot: bool,
    pub frequency_range: FrequencyRange,
    pub access: Access,
    pub link: LinkBudget,
    pub initial_grant_bytes: u64,
    pub profile: ProfileSpec,
    pub traffic: TrafficSpec,
}

/// Expands `a, b, ..., c` and `a, .., c` inside `[...]` lists.
pub fn expand_ellipses(text: &str) -> Result<String> {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('[') {
        let Some(close) = rest[open..].find(']').map(|c| open + c) else { break };
        out.push_str(&rest[..open]);
        let body = &rest[open + 1..close];
        let items: Vec<&str> = body.split(',').map(str::trim).collect();
        if let Some(pos) = items.iter().position(|s| *s == "..." || *s == "..") {
            out.push('[');
            out.push_str(&expand_list(&items, pos)?);
            out.push(']');
        } else {
            out.push_str(&rest[open..=close]);
        }
        rest = &rest[close + 1..];
    }
    out.push_str(rest);
    Ok(out)
}

fn expand_list(items: &[&str], pos: usize) -> Result<String> {
    let bad = || Error::config(format!("cannot expand list [{}]", items.join(", ")));
    let num = |s: &str| s.parse::<i64>().map_err(|_| bad());
    if pos == 0 || pos + 2 != items.len() {
        return Err(bad());
    }
    let head: Vec<i64> = items[..pos].iter().map(|s| num(s)).collect::<Result<_>>()?;
    let last = num(items[pos + 1])?;
    let step = if head.len() >= 2 { head[head.len() - 1] - head[head.len() - 2] } else { 1 };
    let start = *head.last().expect("non-empty head");
    if step <= 0 || last < start {
        return Err(bad());
    }
    let mut v = head[..head.len() - 1].to_vec();
    v.extend((start..=last).step_by(step as usize));
    Ok(v.iter().map(i64::to_string).collect::<Vec<_>>().join(", "))
}

struct Entry {
    value: Value,
    optimize: bool,
    discrete: Option<Vec<Value>>,
}

fn entry(key: &str, v: &Value) -> Result<Entry> {
    match v {
        Value::Mapping(m) => {
            let get = |k: &str| m.get(Value::String(k.into()));
            let value = get("value")
                .cloned()
                .ok_or_else(|| Error::config(format!("{key}: missing `value`")))?;
            let optimize = match get("optimize") {
                None => false,
                Some(Value::Bool(b)) => *b,
                Some(other) => return Err(Error::config(format!("{key}: optimize must be a bool, got {other:?}"))),
            };
            let discrete = match get("discrete_values") {
                None => None,
                Some(Value::Sequence(s)) => Some(s.clone()),
                Some(other) => {
                    return Err(Error::config(format!("{key}: discrete_values must be a list, got {other:?}")))
                }
            };
            if optimize && discrete.as_ref().is_none_or(|d| d.is_empty()) {
                return Err(Error::config(format!("{key}: optimize needs non-empty discrete_values")));
            }
            Ok(Entry {
                value,
                optimize,
                discrete,
            })
        }
        other => Ok(Entry {
            value: other.clone(),
            optimize: false,
            discrete: None,
        }),
    }
}

fn as_f64(key: &str, v: &Value) -> Result<f64> {
    v.as_f64()
        .filter(|x| x.is_finite())
        .ok_or_else(|| Error::config(format!("{key}: expected a number, got {v:?}")))
}

fn as_u32(key: &str, v: &Value) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| Error::config(format!("{key}: expected a non-negative integer, got {v:?}")))
}

fn as_str<'a>(key: &str, v: &'a Value) -> Result<&'a str> {
    v.as_str()
        .ok_or_else(|| Error::config(format!("{key}: expected a string, got {v:?}")))
}

struct Reader {
    map: Mapping,
}

impl Reader {
    fn take(&mut self, key: &str) -> Result<Option<Entry>> {
        match self.map.remove(Value::String(key.into())) {
            Some(v) => entry(key, &v).map(Some),
            None => Ok(None),
        }
    }

    fn scalar_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        match self.take(key)? {
            Some(e) if e.optimize => Err(Error::config(format!("{key} cannot be optimized"))),
            Some(e) => as_f64(key, &e.value),
            None => Ok(default),
        }
    }

    fn axis<T>(&mut self, key: &str, default: Vec<T>, conv: impl Fn(&str, &Value) -> Result<T>) -> Result<Vec<T>> {
        match self.take(key)? {
            None => Ok(default),
            Some(e) if e.optimize => e
                .discrete
                .unwrap_or_default()
                .iter()
                .map(|v| conv(key, v))
                .collect(),
            Some(e) => Ok(vec![conv(key, &e.value)?]),
        }
    }
}

fn sorted_unique<T: PartialOrd + Copy>(key: &str, mut v: Vec<T>) -> Result<Vec<T>> {
    if v.is_empty() {
        return Err(Error::config(format!("{key}: no values")));
    }
    v.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    v.dedup_by(|a, b| a == b);
    Ok(v)
}

impl SearchSpace {
    pub fn default_space() -> Self {
        Self::parse(DEFAULT_SPACE).expect("bundled search space parses")
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Keys missing from `text` take the bundled defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let expanded = expand_ellipses(text)?;
        let map: Mapping = match serde_yaml::from_str::<Value>(&expanded) {
            Ok(Value::Mapping(m)) => m,
            Ok(Value::Null) => Mapping::new(),
            Ok(other) => return Err(Error::config(format!("search space must be a mapping, got {other:?}"))),
            Err(e) => {
                let line = e.location().map(|l| l.line()).unwrap_or(0);
                return Err(Error::Parse { line, msg: e.to_string() });
            }
        };
        let mut r = Reader { map };
        let p = ProfileSpec::testbed_defaults();

        let l1_mean = r.scalar_f64("ue_preparation_time_sr_mean", 1.464)?;
        let l1_std = r.scalar_f64("ue_preparation_time_sr_std", 0.175)?;
        let p1 = r.scalar_f64("gnb_processing_time_sr", 0.1)?;
        let p2 = r.scalar_f64("mac_scheduling_time", 0.1)?;
        let p3 = r.scalar_f64("gnb_phy_processing_time", 0.01)?;
        let r1 = r.scalar_f64("radio_preparation_time", 0.5)?;
        let l2 = r.scalar_f64("ue_l2_down_processing_time", 0.3)?;
        let l2_prime = r.scalar_f64("ue_bsr_preparation_time", l2)?;
        let l3 = r.scalar_f64("ue_dl_processing_time", l2)?;
        let p5 = r.scalar_f64("gnb_dl_processing_time", p.p5.mean())?;
        let p4_scale = r.scalar_f64("gnb_processing_time_l1_up_mean", 0.13)?;
        let p4_shape = r.scalar_f64("gnb_processing_time_l1_up_std", 0.40)?;
        let p4_loc = r.scalar_f64("gnb_processing_time_l1_up_loc", 0.27)?;
        let gauss = |m: f64, s: f64| if s == 0.0 { DistSpec::constant(m) } else { DistSpec::gaussian(m, s) };
        let profile = ProfileSpec {
            l1: gauss(l1_mean, l1_std),
            l2: DistSpec::constant(l2),
            l2_prime: DistSpec::constant(l2_prime),
            l3: DistSpec::constant(l3),
            p1: DistSpec::constant(p1),
            p2: DistSpec::constant(p2),
            p3: DistSpec::constant(p3),
            p4: if p4_shape == 0.0 {
                DistSpec::constant(p4_loc + p4_scale)
            } else {
                DistSpec::lognormal(p4_shape, p4_loc, p4_scale)
            },
            p5: DistSpec::constant(p5),
            r1: DistSpec::constant(r1),
        };
        profile.check()?;

        let int = |k: &str, v: &Value| as_u32(k, v);
        let slot_duration = sorted_unique("slot_duration", r.axis("slot_duration", vec![0.5], as_f64)?)?;
        for &s in &slot_duration {
            SlotGrid::from_slot_ms(s)?;
        }
        let space = SearchSpace {
            slot_duration,
            dl_ul_tx_period: sorted_unique("dl_ul_tx_period", r.axis("dl_ul_tx_period", vec![4], int)?)?,
            nof_dl_slots: sorted_unique("nof_dl_slots", r.axis("nof_dl_slots", vec![2], int)?)?,
            k2: sorted_unique("k2", r.axis("k2", vec![1], int)?)?,
            sr_period: sorted_unique("sr_period", r.axis("sr_period", vec![4], int)?)?,
            sr_offset: sorted_unique("sr_offset", r.axis("sr_offset", vec![3], int)?)?,
            pucch_st_sym: sorted_unique("pucch_st_sym", r.axis("pucch_st_sym", vec![13], int)?)?,
            pucch_nof_sym: sorted_unique("pucch_nof_sym", r.axis("pucch_nof_sym", vec![1], int)?)?,
            pdcch_nof_sym: sorted_unique("pdcch_nof_sym", r.axis("pdcch_nof_sym", vec![1], int)?)?,
            in_advance_submission: sorted_unique(
                "in_advance_submission",
                r.axis("in_advance_submission", vec![1], int)?,
            )?,
            no_mixed_slot: match r.take("no_mixed_slot")? {
                None => true,
                Some(e) => e
                    .value
                    .as_bool()
                    .ok_or_else(|| Error::config("no_mixed_slot: expected a bool"))?,
            },
            frequency_range: match r.take("frequency_range")? {
                None => FrequencyRange::Fr1,
                Some(e) => match as_str("frequency_range", &e.value)?.to_ascii_lowercase().as_str() {
                    "fr1" => FrequencyRange::Fr1,
                    "fr2" => FrequencyRange::Fr2,
                    other => return Err(Error::config(format!("unknown frequency range {other:?}"))),
                },
            },
            access: match r.take("access")? {
                None => Access::GrantBased,
                Some(e) => match as_str("access", &e.value)? {
                    "grant-based" => Access::GrantBased,
                    "grant-free" => Access::GrantFree,
                    other => return Err(Error::config(format!("unknown access mode {other:?}"))),
                },
            },
            link: LinkBudget {
                bandwidth_mhz: match r.take("bandwidth_mhz")? {
                    None => 20,
                    Some(e) => as_u32("bandwidth_mhz", &e.value)?,
                },
                mcs_index: match r.take("mcs_index")? {
                    None => 20,
                    Some(e) => u8::try_from(as_u32("mcs_index", &e.value)?)
                        .map_err(|_| Error::config("mcs_index out of range"))?,
                },
            },
            initial_grant_bytes: match r.take("initial_grant_bytes")? {
                None => 100,
                Some(e) => u64::from(as_u32("initial_grant_bytes", &e.value)?),
            },
            profile,
            traffic: match r.take("traffic")? {
                None => TrafficSpec::constant(101.0, 64, 10_000),
                Some(e) => TrafficSpec::parse(as_str("traffic", &e.value)?, 0)?,
            },
        };
        if let Some((k, _)) = r.map.iter().next() {
            return Err(Error::config(format!("unknown search-space key {k:?}")));
        }
        if !space.no_mixed_slot {
            return Err(Error::config("patterns with mixed slots are not modeled; set no_mixed_slot: true"));
        }
        Ok(space)
    }

    pub fn mode(&self) -> Mode {
        match self.access {
            Access::GrantBased => Mode::UL,
            Access::GrantFree => Mode::GRANT_FREE,
        }
    }

    /// Fixed processing values used by the pruning predicates (field means).
    pub fn nominal_profile(&self) -> ProcessingProfile {
        self.profile.means()
    }

    /// Raw Cartesian size of the swept axes.
    pub fn cartesian_size(&self) -> u128 {
        [
            self.slot_duration.len(),
            self.dl_ul_tx_period.len(),
            self.nof_dl_slots.len(),
            self.k2.len(),
            self.sr_period.len(),
            self.sr_offset.len(),
            self.pucch_st_sym.len(),
            self.pucch_nof_sym.len(),
            self.pdcch_nof_sym.len(),
            self.in_advance_submission.len(),
        ]
        .iter()
        .map(|&n| n as u128)
        .product()
    }

    /// The system configuration a point describes. Does not check validity.
    pub fn config(&self, p: &Point) -> Result<SystemConfig> {
        Ok(SystemConfig {
            grid: SlotGrid::from_slot_ms(p.slot_ms)?,
            pattern: TddPattern::common(p.period, p.dl_slots),
            ctrl: ControlAndTiming {
                sr_period: p.sr_period,
                sr_offset: p.sr_offset,
                pucch_start: p.pucch_start,
                pucch_symbols: p.pucch_symbols,
                pdcch_symbols: p.pdcch_symbols,
                advance_slots: p.advance_slots,
                k2_override: Some(p.k2),
                initial_grant_bytes: self.initial_grant_bytes,
            },
            link: self.link,
            grant_free: None,
        })
    }

    /// A space holding exactly `p`, with everything else copied from `self`.
    pub fn single(&self, p: &Point) -> Self {
        SearchSpace {
            slot_duration: vec![p.slot_ms],
            dl_ul_tx_period: vec![p.period],
            nof_dl_slots: vec![p.dl_slots],
            k2: vec![p.k2],
            sr_period: vec![p.sr_period],
            sr_offset: vec![p.sr_offset],
            pucch_st_sym: vec![p.pucch_start],
            pucch_nof_sym: vec![p.pucch_symbols],
            pdcch_nof_sym: vec![p.pdcch_symbols],
            in_advance_submission: vec![p.advance_slots],
            ..self.clone()
        }
    }
}
