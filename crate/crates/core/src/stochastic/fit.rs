use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dist::{DistSpec, ProfileSpec};
use super::distribution::LatencyDistribution;
use super::engine::latency_distribution_with;
use super::wasserstein::wasserstein;
use crate::error::{Error, Result};
use crate::eval::Evaluator;
use crate::traffic::PacketTrace;

/// Which delay the grid parameterizes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitTarget {
    /// UE SR preparation `l1 ~ N(first, second)`.
    UePreparation,
    /// gNB processing `p4 ~ lognormal(shape = first, loc = second)`, scale kept.
    GnbProcessing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitGrid {
    pub target: FitTarget,
    pub first: Vec<f64>,
    pub second: Vec<f64>,
}

/// `start, start+step, ..., <= stop`.
pub fn linspace_step(start: f64, stop: f64, step: f64) -> Vec<f64> {
    if !(step > 0.0) || stop < start {
        return Vec::new();
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| ((start + i as f64 * step) * 1e9).round() / 1e9).collect()
}

impl FitGrid {
    /// mean 0.5..=3.5 and std 0.05..=0.8 ms in 0.05 steps.
    pub fn default_ue() -> Self {
        FitGrid {
            target: FitTarget::UePreparation,
            first: linspace_step(0.5, 3.5, 0.05),
            second: linspace_step(0.05, 0.8, 0.05),
        }
    }

    /// Parses `a:b:step,c:d:step` (first axis, second axis).
    pub fn parse(target: FitTarget, text: &str) -> Result<Self> {
        let axis = |s: &str| -> Result<Vec<f64>> {
            let v: Vec<f64> = s
                .split(':')
                .map(|x| x.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|_| Error::config(format!("bad grid axis {s:?}")))?;
            match v.as_slice() {
                [x] => Ok(vec![*x]),
                [a, b, step] => Ok(linspace_step(*a, *b, *step)),
                _ => Err(Error::config(format!("grid axis {s:?}: expected START:STOP:STEP or a value"))),
            }
        };
        let (a, b) = text
            .split_once(',')
            .ok_or_else(|| Error::config("grid needs two axes separated by ','"))?;
        Ok(FitGrid {
            target,
            first: axis(a)?,
            second: axis(b)?,
        })
    }

    pub fn points(&self) -> Vec<(f64, f64)> {
        self.first
            .iter()
            .flat_map(|&a| self.second.iter().map(move |&b| (a, b)))
            .collect()
    }

    pub fn apply(&self, base: &ProfileSpec, (a, b): (f64, f64)) -> ProfileSpec {
        let mut p = base.clone();
        match self.target {
            FitTarget::UePreparation => p.l1 = DistSpec::gaussian(a, b),
            FitTarget::GnbProcessing => {
                let scale = match &base.p4 {
                    DistSpec::LogNormal { scale, .. } => *scale,
                    other => other.mean(),
                };
                p.p4 = DistSpec::lognormal(a, b, scale);
            }
        }
        p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitResult {
    pub first: f64,
    pub second: f64,
    pub distance: f64,
}

/// Grid point whose model output is closest (Wasserstein) to `observed`.
/// Ties go to the lexicographically smallest `(first, second)`.
pub fn fit_learned_distribution(
    ev: &Evaluator,
    observed: &LatencyDistribution,
    grid: &FitGrid,
    base: &ProfileSpec,
    trace: &PacketTrace,
    n_packets: usize,
    seed: u64,
) -> Result<FitResult> {
    let points = grid.points();
    if points.is_empty() {
        return Err(Error::config("empty fit grid"));
    }
    let scored: Vec<Result<FitResult>> = points
        .par_iter()
        .map(|&pt| {
            let spec = grid.apply(base, pt);
            let run = latency_distribution_with(ev, &spec, trace, n_packets, seed, false)?;
            Ok(FitResult {
                first: pt.0,
                second: pt.1,
                distance: wasserstein(&run.distribution, observed),
            })
        })
        .collect();
    let mut best: Option<FitResult> = None;
    let mut first_error = None;
    for r in scored {
        match r {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => {
                        r.distance < b.distance
                            || (r.distance == b.distance && (r.first, r.second) < (b.first, b.second))
                    }
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    best.ok_or_else(|| first_error.unwrap_or_else(|| Error::config("no grid point evaluated")))
}
