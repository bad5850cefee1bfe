use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::{count_valid, enumerate_valid, sample_valid, Pinning};
use super::space::{Point, SearchSpace};
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::profile::ProcessingProfile;
use crate::stochastic::{
    draw_profiles, evaluate_totals, latency_distribution_with, nearest_rank, select_percentile,
    DistributionRun, LatencyDistribution,
};
use crate::traffic::{generate_trace, Packet, PacketTrace};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Objective {
    Mean,
    Percentile(f64),
    Max,
}

impl Objective {
    pub fn of(&self, totals: &mut [f64]) -> f64 {
        match *self {
            Objective::Mean => totals.iter().sum::<f64>() / totals.len() as f64,
            Objective::Max => totals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            Objective::Percentile(q) => select_percentile(totals, q),
        }
    }
}

impl FromStr for Objective {
    type Err = Error;

    /// `mean`, `max`, `p99.9` or `percentile:99.9`.
    fn from_str(s: &str) -> Result<Self> {
        let q = match s {
            "mean" => return Ok(Objective::Mean),
            "max" => return Ok(Objective::Max),
            _ => s
                .strip_prefix("percentile:")
                .or_else(|| s.strip_prefix('p'))
                .and_then(|q| q.parse::<f64>().ok()),
        };
        match q {
            Some(q) if (0.0..=100.0).contains(&q) => Ok(Objective::Percentile(q)),
            _ => Err(Error::config(format!("unknown objective {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReliabilityTarget {
    pub latency_bound_ms: f64,
    /// Percent, in `(0, 100]`.
    pub reliability: f64,
}

impl ReliabilityTarget {
    pub fn new(latency_bound_ms: f64, reliability: f64) -> Result<Self> {
        if !(reliability > 0.0 && reliability <= 100.0) || !latency_bound_ms.is_finite() {
            return Err(Error::config(format!(
                "reliability target needs 0 < reliability <= 100, got {latency_bound_ms} ms @ {reliability}"
            )));
        }
        Ok(ReliabilityTarget {
            latency_bound_ms,
            reliability,
        })
    }

    /// Largest count of samples above the bound that still meets the target.
    fn allowed_misses(&self, n: usize) -> usize {
        let rank = ((self.reliability / 100.0) * n as f64 - 1e-9).ceil().max(1.0) as usize;
        n - rank.min(n)
    }
}

impl FromStr for ReliabilityTarget {
    type Err = Error;

    /// `1ms@99.99`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::config(format!("target {s:?}: expected e.g. 1ms@99.99"));
        let (bound, rel) = s.split_once('@').ok_or_else(bad)?;
        let bound = bound.trim().trim_end_matches("ms").trim().parse::<f64>().map_err(|_| bad())?;
        let rel = rel.trim().trim_end_matches('%').parse::<f64>().map_err(|_| bad())?;
        Self::new(bound, rel)
    }
}

/// Whether the nearest-rank percentile at `target.reliability` is within the bound.
pub fn reliability_check(dist: &LatencyDistribution, target: &ReliabilityTarget) -> (bool, f64) {
    let v = dist.percentile(target.reliability);
    (v <= target.latency_bound_ms, v)
}

#[derive(Debug, Clone)]
pub struct SearchOptions {
    pub objective: Objective,
    pub n_coarse: usize,
    pub n_fine: usize,
    /// Skip the coarse phase.
    pub exact: bool,
    pub seed: u64,
    /// 0 = rayon default.
    pub workers: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            objective: Objective::Mean,
            n_coarse: 500,
            n_fine: 10_000,
            exact: false,
            seed: 0,
            workers: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub best: Point,
    pub objective: f64,
    pub run: DistributionRun,
    /// Valid configurations after pinning.
    pub valid: usize,
    /// Configurations that reached the fine phase.
    pub finalists: usize,
}

pub(crate) fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Common inputs shared by every configuration, so rankings compare like with like.
struct Workload {
    packets: Vec<Packet>,
    draws: Vec<ProcessingProfile>,
}

impl Workload {
    fn new(space: &SearchSpace, n: usize, seed: u64) -> Result<Self> {
        let mut spec = space.traffic.clone();
        spec.count = n;
        spec.seed = seed;
        let trace = generate_trace(&spec)?;
        Ok(Workload {
            packets: trace.packets,
            draws: draw_profiles(&space.profile, n, seed),
        })
    }
}

fn score(space: &SearchSpace, p: &Point, w: &Workload, n: usize, obj: Objective) -> Option<f64> {
    let cfg = space.config(p).ok()?;
    let ev = Evaluator::new(&cfg, space.mode()).ok()?;
    let mut totals = evaluate_totals(&ev, &w.draws[..n], &w.packets[..n]).ok()?;
    Some(obj.of(&mut totals))
}

fn rank(points: &[Point], scores: Vec<Option<f64>>) -> Vec<(f64, usize)> {
    let mut v: Vec<(f64, usize)> = scores
        .into_iter()
        .enumerate()
        .filter_map(|(i, s)| s.map(|s| (s, i)))
        .collect();
    v.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| points[a.1].key().cmp(&points[b.1].key())));
    v
}

/// Two-phase search: rank every pinned configuration on `n_coarse` packets,
/// keep the best tenth, re-rank those on `n_fine` packets.
pub fn optimize(space: &SearchSpace, opts: &SearchOptions) -> Result<OptimizeResult> {
    let points = enumerate_valid(space, Pinning::Monotone);
    optimize_points(space, &points, opts)
}

pub fn optimize_points(space: &SearchSpace, points: &[Point], opts: &SearchOptions) -> Result<OptimizeResult> {
    if points.is_empty() {
        return Err(Error::NoFeasibleConfiguration);
    }
    if opts.n_fine == 0 || (!opts.exact && opts.n_coarse == 0) {
        return Err(Error::config("packet counts must be positive"));
    }
    let n_max = opts.n_fine.max(if opts.exact { 0 } else { opts.n_coarse });
    let w = Workload::new(space, n_max, opts.seed)?;
    let obj = opts.objective;
    with_workers(opts.workers, || {
        let finalists: Vec<usize> = if opts.exact {
            (0..points.len()).collect()
        } else {
            let scores: Vec<Option<f64>> = points
                .par_iter()
                .map(|p| score(space, p, &w, opts.n_coarse, obj))
                .collect();
            let ranked = rank(points, scores);
            let keep = points.len().div_ceil(10).max(1).min(ranked.len());
            let mut idx: Vec<usize> = ranked[..keep].iter().map(|&(_, i)| i).collect();
            idx.sort_unstable();
            idx
        };
        let scores: Vec<Option<f64>> = finalists
            .par_iter()
            .map(|&i| score(space, &points[i], &w, opts.n_fine, obj))
            .collect();
        let sub: Vec<Point> = finalists.iter().map(|&i| points[i]).collect();
        let ranked = rank(&sub, scores);
        let &(value, j) = ranked.first().ok_or(Error::NoFeasibleConfiguration)?;
        let best = sub[j];
        let cfg = space.config(&best)?;
        let ev = Evaluator::new(&cfg, space.mode())?;
        let trace = PacketTrace::new(w.packets[..opts.n_fine].to_vec());
        let run = latency_distribution_with(&ev, &space.profile, &trace, opts.n_fine, opts.seed, false)?;
        Ok(OptimizeResult {
            best,
            objective: value,
            run,
            valid: points.len(),
            finalists: sub.len(),
        })
    })?
}

#[derive(Debug, Clone, Serialize)]
pub struct Match {
    pub point: Point,
    /// Nearest-rank latency at the target reliability.
    pub achieved_ms: f64,
}

#[derive(Debug, Clone)]
pub struct FindAllResult {
    pub matches: Vec<Match>,
    /// Configurations evaluated.
    pub considered: usize,
    /// Size of the full valid set (before any subsampling).
    pub valid_total: u64,
}

#[derive(Debug, Clone)]
pub struct FindAllOptions {
    pub packets: usize,
    pub seed: u64,
    pub workers: usize,
    /// Evaluate a uniform subsample of this many configurations.
    pub sample: Option<usize>,
    pub sample_seed: u64,
}

impl Default for FindAllOptions {
    fn default() -> Self {
        FindAllOptions {
            packets: 10_000,
            seed: 0,
            workers: 0,
            sample: None,
            sample_seed: 0,
        }
    }
}

/// `Some(achieved)` if the configuration meets `target`. Stops at the first
/// miss beyond the allowance; the achieved value is then not computed.
fn meets(space: &SearchSpace, p: &Point, w: &Workload, n: usize, target: &ReliabilityTarget) -> Option<f64> {
    let cfg = space.config(p).ok()?;
    let ev = Evaluator::new(&cfg, space.mode()).ok()?;
    let mut totals = Vec::with_capacity(n);
    let mut evaluated = 0usize;
    let mut misses = 0usize;
    for (pk, dr) in w.packets[..n].iter().zip(&w.draws[..n]) {
        let Ok(b) = ev.evaluate(dr, pk.arrival_ms, pk.size_bytes) else { continue };
        evaluated += 1;
        if b.total > target.latency_bound_ms {
            misses += 1;
            // Even if every remaining packet succeeds, the target is out of reach.
            if misses > target.allowed_misses(n) {
                return None;
            }
        }
        totals.push(b.total);
    }
    if evaluated == 0 || misses > target.allowed_misses(evaluated) {
        return None;
    }
    totals.sort_by(f64::total_cmp);
    let v = nearest_rank(&totals, target.reliability);
    (v <= target.latency_bound_ms).then_some(v)
}

/// Every valid configuration (no pinning, no coarse cut) meeting `target`.
pub fn find_all(space: &SearchSpace, target: &ReliabilityTarget, opts: &FindAllOptions) -> Result<FindAllResult> {
    if opts.packets == 0 {
        return Err(Error::config("packet count must be positive"));
    }
    let valid_total = count_valid(space, Pinning::None);
    if valid_total == 0 {
        return Err(Error::NoFeasibleConfiguration);
    }
    let points = match opts.sample {
        Some(n) => sample_valid(space, Pinning::None, n, opts.sample_seed),
        None => enumerate_valid(space, Pinning::None),
    };
    let w = Workload::new(space, opts.packets, opts.seed)?;
    let n = opts.packets;
    let matches = with_workers(opts.workers, || {
        points
            .par_iter()
            .filter_map(|p| {
                meets(space, p, &w, n, target).map(|achieved_ms| Match {
                    point: *p,
                    achieved_ms,
                })
            })
            .collect::<Vec<_>>()
    })?;
    Ok(FindAllResult {
        matches,
        considered: points.len(),
        valid_total,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reliability_examples() {
        let d = LatencyDistribution::new(vec![1.0, 1.0, 1.0, 2.0]).unwrap();
        assert_eq!(reliability_check(&d, &"2ms@75".parse().unwrap()), (true, 1.0));
        assert!(!reliability_check(&d, &"0.9ms@50".parse().unwrap()).0);
        let one = LatencyDistribution::new(vec![1.0]).unwrap();
        assert!(reliability_check(&one, &"1ms@100".parse().unwrap()).0);
        assert!("1ms@0".parse::<ReliabilityTarget>().is_err());
        assert!("1ms@100.5".parse::<ReliabilityTarget>().is_err());
    }

    #[test]
    fn objective_parsing() {
        assert_eq!("mean".parse::<Objective>().unwrap(), Objective::Mean);
        assert_eq!("p99.9".parse::<Objective>().unwrap(), Objective::Percentile(99.9));
        assert_eq!("percentile:50".parse::<Objective>().unwrap(), Objective::Percentile(50.0));
        assert!("median".parse::<Objective>().is_err());
    }

    #[test]
    fn miss_allowance_matches_nearest_rank() {
        let t = ReliabilityTarget::new(1.0, 99.99).unwrap();
        assert_eq!(t.allowed_misses(10_000), 1);
        assert_eq!(t.allowed_misses(100), 0);
        let t = ReliabilityTarget::new(1.0, 75.0).unwrap();
        assert_eq!(t.allowed_misses(4), 1);
    }
}
