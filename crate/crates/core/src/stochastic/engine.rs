use rayon::prelude::*;

use super::dist::{packet_rng, ProfileSpec};
use super::distribution::LatencyDistribution;
use crate::breakdown::LatencyBreakdown;
use crate::error::{Error, Result};
use crate::eval::{Evaluator, Mode};
use crate::model::SystemConfig;
use crate::profile::ProcessingProfile;
use crate::traffic::{Packet, PacketTrace};
use crate::train::run_packet_train;

/// Output of a Monte-Carlo run.
#[derive(Debug, Clone)]
pub struct DistributionRun {
    pub distribution: LatencyDistribution,
    /// One per kept packet, aligned with `distribution.samples()`.
    pub breakdowns: Vec<LatencyBreakdown>,
    /// Trace index of each kept packet.
    pub packet_index: Vec<usize>,
    /// Packets whose pipeline returned an error.
    pub excluded: usize,
    pub first_error: Option<Error>,
}

/// Packet `i` always gets the `i`-th stream of `seed`.
pub fn draw_profiles(spec: &ProfileSpec, n: usize, seed: u64) -> Vec<ProcessingProfile> {
    if spec.is_deterministic() {
        return vec![spec.means(); n];
    }
    (0..n)
        .into_par_iter()
        .map(|i| spec.draw(&mut packet_rng(seed, i as u64)))
        .collect()
}

/// Per-packet latency distribution of `cfg` under `mode`.
///
/// Uses the first `n_packets` packets of `trace`. With `train` set, packets
/// share one buffer (grant-based uplink only); otherwise each is evaluated alone.
pub fn latency_distribution(
    cfg: &SystemConfig,
    mode: Mode,
    profiles: &ProfileSpec,
    trace: &PacketTrace,
    n_packets: usize,
    seed: u64,
    train: bool,
) -> Result<DistributionRun> {
    let ev = Evaluator::new(cfg, mode)?;
    latency_distribution_with(&ev, profiles, trace, n_packets, seed, train)
}

pub fn latency_distribution_with(
    ev: &Evaluator,
    profiles: &ProfileSpec,
    trace: &PacketTrace,
    n_packets: usize,
    seed: u64,
    train: bool,
) -> Result<DistributionRun> {
    profiles.check()?;
    if n_packets == 0 {
        return Err(Error::config("need at least one packet"));
    }
    if trace.len() < n_packets {
        return Err(Error::config(format!(
            "trace has {} packets, {} requested",
            trace.len(),
            n_packets
        )));
    }
    let packets = &trace.packets[..n_packets];
    let draws = draw_profiles(profiles, n_packets, seed);
    let results: Vec<Result<LatencyBreakdown>> = if train {
        run_packet_train(ev, &draws, &PacketTrace::new(packets.to_vec()))?.results
    } else {
        packets
            .par_iter()
            .zip(draws.par_iter())
            .map(|(p, dr)| ev.evaluate(dr, p.arrival_ms, p.size_bytes))
            .collect()
    };
    collect(results)
}

fn collect(results: Vec<Result<LatencyBreakdown>>) -> Result<DistributionRun> {
    let mut breakdowns = Vec::with_capacity(results.len());
    let mut packet_index = Vec::with_capacity(results.len());
    let mut excluded = 0;
    let mut first_error = None;
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Ok(b) => {
                breakdowns.push(b);
                packet_index.push(i);
            }
            Err(e) => {
                excluded += 1;
                first_error.get_or_insert(e);
            }
        }
    }
    if breakdowns.is_empty() {
        return Err(first_error.unwrap_or_else(|| Error::config("no packets evaluated")));
    }
    let distribution = LatencyDistribution::new(breakdowns.iter().map(|b| b.total).collect())?;
    Ok(DistributionRun {
        distribution,
        breakdowns,
        packet_index,
        excluded,
        first_error,
    })
}

/// Totals only, sequentially, for callers that parallelize at a coarser grain.
/// Errors for individual packets are skipped; fails if every packet fails.
pub fn evaluate_totals(ev: &Evaluator, draws: &[ProcessingProfile], packets: &[Packet]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(packets.len());
    let mut first_error = None;
    for (p, dr) in packets.iter().zip(draws) {
        match ev.evaluate(dr, p.arrival_ms, p.size_bytes) {
            Ok(b) => out.push(b.total),
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    match (out.is_empty(), first_error) {
        (true, Some(e)) => Err(e),
        (true, None) => Err(Error::config("no packets evaluated")),
        _ => Ok(out),
    }
}
