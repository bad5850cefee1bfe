use serde::Serialize;

use crate::error::{Error, Result};

/// Latency samples (ms) with order statistics.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LatencyDistribution {
    samples: Vec<f64>,
    #[serde(skip)]
    sorted: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Summary {
    pub count: usize,
    pub min: f64,
    pub mean: f64,
    pub max: f64,
    pub p50: f64,
    pub p90: f64,
    pub p99: f64,
    pub p9999: f64,
}

impl LatencyDistribution {
    pub fn new(samples: Vec<f64>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::config("latency distribution needs at least one sample"));
        }
        if let Some(x) = samples.iter().find(|x| !x.is_finite()) {
            return Err(Error::config(format!("non-finite latency sample {x}")));
        }
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        Ok(LatencyDistribution { samples, sorted })
    }

    /// Samples in their original (packet) order.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn sorted(&self) -> &[f64] {
        &self.sorted
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn min(&self) -> f64 {
        self.sorted[0]
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1]
    }

    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Nearest-rank percentile, `q` in `[0, 100]`.
    pub fn percentile(&self, q: f64) -> f64 {
        nearest_rank(&self.sorted, q)
    }

    /// Fraction of samples at or below `bound_ms`.
    pub fn reliability(&self, bound_ms: f64) -> f64 {
        let n = self.sorted.partition_point(|&x| x <= bound_ms);
        n as f64 / self.sorted.len() as f64
    }

    /// `(latency, cumulative fraction)` at each distinct sample.
    pub fn cdf(&self) -> Vec<(f64, f64)> {
        let n = self.sorted.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, &x) in self.sorted.iter().enumerate() {
            let frac = (i + 1) as f64 / n;
            match out.last_mut() {
                Some(last) if last.0 == x => last.1 = frac,
                _ => out.push((x, frac)),
            }
        }
        out
    }

    /// CDF after mapping `[lo, hi]` onto `[0, 1]`.
    pub fn normalized_cdf(&self, lo: f64, hi: f64) -> Vec<(f64, f64)> {
        let span = hi - lo;
        self.cdf()
            .into_iter()
            .map(|(x, f)| (if span > 0.0 { (x - lo) / span } else { 0.0 }, f))
            .collect()
    }

    pub fn summary(&self) -> Summary {
        Summary {
            count: self.len(),
            min: self.min(),
            mean: self.mean(),
            max: self.max(),
            p50: self.percentile(50.0),
            p90: self.percentile(90.0),
            p99: self.percentile(99.0),
            p9999: self.percentile(99.99),
        }
    }
}

/// Nearest-rank percentile of an ascending slice.
pub fn nearest_rank(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let rank = ((q / 100.0) * n as f64 - 1e-9).ceil().max(1.0) as usize;
    sorted[rank.min(n) - 1]
}

/// Nearest-rank percentile without a full sort.
pub fn select_percentile(values: &mut [f64], q: f64) -> f64 {
    let n = values.len();
    let rank = ((q / 100.0) * n as f64 - 1e-9).ceil().max(1.0) as usize;
    let idx = rank.min(n) - 1;
    *values.select_nth_unstable_by(idx, f64::total_cmp).1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nearest_rank_small() {
        let d = LatencyDistribution::new(vec![1.0, 2.0, 1.0, 1.0]).unwrap();
        assert_eq!(d.percentile(75.0), 1.0);
        assert_eq!(d.percentile(76.0), 2.0);
        assert_eq!(d.percentile(0.0), d.min());
        assert_eq!(d.percentile(100.0), d.max());
        assert_eq!(d.reliability(1.0), 0.75);
        assert_eq!(d.cdf(), vec![(1.0, 0.75), (2.0, 1.0)]);
    }

    #[test]
    fn select_agrees_with_sort() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64).collect();
        let d = LatencyDistribution::new(v.clone()).unwrap();
        for q in [0.0, 1.0, 50.0, 99.0, 99.99, 100.0] {
            let mut w = v.clone();
            assert_eq!(select_percentile(&mut w, q), d.percentile(q));
        }
    }
}
