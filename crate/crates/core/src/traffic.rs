//! Synthetic traffic, trace files and result export.
//!
//! Trace files hold one `arrival_ms,size_bytes` record per line. A header
//! line, blank lines and `#` comments are allowed.

use std::fmt::Write as _;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::breakdown::{Component, LatencyBreakdown};
use crate::error::{Error, Result};
use crate::stochastic::{DistSpec, LatencyDistribution};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Packet {
    pub arrival_ms: f64,
    pub size_bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PacketTrace {
    pub packets: Vec<Packet>,
}

impl PacketTrace {
    pub fn new(packets: Vec<Packet>) -> Self {
        PacketTrace { packets }
    }

    pub fn len(&self) -> usize {
        self.packets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.packets.is_empty()
    }

    pub fn is_sorted(&self) -> bool {
        self.packets.windows(2).all(|w| w[0].arrival_ms <= w[1].arrival_ms)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PacketSize {
    Fixed(u64),
    Random(DistSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrafficSpec {
    pub inter_arrival: DistSpec,
    pub packet_size: PacketSize,
    pub count: usize,
    pub seed: u64,
}

impl TrafficSpec {
    /// Fixed gaps and sizes.
    pub fn constant(gap_ms: f64, size: u64, count: usize) -> Self {
        TrafficSpec {
            inter_arrival: DistSpec::constant(gap_ms),
            packet_size: PacketSize::Fixed(size),
            count,
            seed: 0,
        }
    }

    /// Parses `constant:101`, `gaussian:105,0.05` or `poisson:20`, plus a size
    /// and count, e.g. `constant:101@64x10000`.
    pub fn parse(text: &str, seed: u64) -> Result<Self> {
        let bad = || Error::config(format!("traffic spec {text:?}: expected KIND:PARAMS@SIZExCOUNT"));
        let (dist, rest) = text.split_once('@').ok_or_else(bad)?;
        let (size, count) = rest.split_once('x').ok_or_else(bad)?;
        let (kind, params) = dist.split_once(':').ok_or_else(bad)?;
        let nums: Vec<f64> = params
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?;
        let inter_arrival = match (kind.trim(), nums.as_slice()) {
            ("constant", [v]) => DistSpec::constant(*v),
            ("gaussian", [m, s]) => DistSpec::gaussian(*m, *s),
            ("poisson", [m]) => DistSpec::Exponential { mean: *m },
            _ => return Err(bad()),
        };
        Ok(TrafficSpec {
            inter_arrival,
            packet_size: PacketSize::Fixed(size.trim().parse().map_err(|_| bad())?),
            count: count.trim().parse().map_err(|_| bad())?,
            seed,
        })
    }

    pub fn check(&self) -> Result<()> {
        match &self.inter_arrival {
            DistSpec::Constant { value } if *value <= 0.0 => {
                return Err(Error::config("inter-arrival time must be positive"))
            }
            DistSpec::Constant { .. } | DistSpec::Gaussian { .. } | DistSpec::Exponential { .. } => {}
            other => {
                return Err(Error::config(format!(
                    "inter-arrival must be constant, gaussian or poisson, got {other:?}"
                )))
            }
        }
        self.inter_arrival.check()?;
        match &self.packet_size {
            PacketSize::Fixed(0) => Err(Error::config("packet size must be positive")),
            PacketSize::Fixed(_) => Ok(()),
            PacketSize::Random(d) => d.check(),
        }
    }
}

/// Arrivals are cumulative sums of inter-arrival draws. Non-positive draws
/// are redrawn so arrivals stay strictly increasing.
pub fn generate_trace(spec: &TrafficSpec) -> Result<PacketTrace> {
    spec.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut t = 0.0;
    let mut packets = Vec::with_capacity(spec.count);
    for _ in 0..spec.count {
        let mut gap = spec.inter_arrival.draw(&mut rng);
        let mut tries = 0;
        while gap <= 0.0 {
            tries += 1;
            if tries > 1000 {
                return Err(Error::config("inter-arrival distribution keeps yielding zero"));
            }
            gap = spec.inter_arrival.draw(&mut rng);
        }
        t += gap;
        let size = match &spec.packet_size {
            PacketSize::Fixed(n) => *n,
            PacketSize::Random(d) => (d.draw(&mut rng).round() as u64).max(1),
        };
        packets.push(Packet {
            arrival_ms: t,
            size_bytes: size,
        });
    }
    Ok(PacketTrace { packets })
}

pub fn parse_trace(text: &str) -> Result<PacketTrace> {
    let mut packets = Vec::new();
    let mut seen_data = false;
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.trim_end_matches('\r').trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |msg: String| Error::Parse { line: line_no, msg };
        let (a, b) = line
            .split_once(',')
            .ok_or_else(|| err(format!("expected `arrival_ms,size_bytes`, got {line:?}")))?;
        let arrival = a.trim().parse::<f64>();
        let size = b.trim().parse::<u64>();
        let (arrival, size) = match (arrival, size) {
            (Ok(x), Ok(n)) => (x, n),
            _ if !seen_data && a.trim().parse::<f64>().is_err() => {
                // header
                seen_data = true;
                continue;
            }
            _ => return Err(err(format!("malformed record {line:?}"))),
        };
        seen_data = true;
        if !(arrival.is_finite() && arrival >= 0.0) {
            return Err(err(format!("arrival time must be >= 0, got {arrival}")));
        }
        if size == 0 {
            return Err(err("packet size must be positive".into()));
        }
        if let Some(prev) = packets.last().map(|p: &Packet| p.arrival_ms) {
            if arrival < prev {
                return Err(err(format!("arrival {arrival} precedes the previous record {prev}")));
            }
        }
        packets.push(Packet {
            arrival_ms: arrival,
            size_bytes: size,
        });
    }
    Ok(PacketTrace { packets })
}

pub fn load_trace(path: &Path) -> Result<PacketTrace> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_trace(&text)
}

pub fn format_trace(trace: &PacketTrace) -> String {
    let mut s = String::from("arrival_ms,size_bytes\n");
    for p in &trace.packets {
        // `{}` on f64 prints the shortest string that round-trips.
        let _ = writeln!(s, "{},{}", p.arrival_ms, p.size_bytes);
    }
    s
}

pub fn save_trace(trace: &PacketTrace, path: &Path) -> Result<()> {
    std::fs::write(path, format_trace(trace)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    SamplesTable,
    CdfTable,
    Summary,
}

impl std::str::FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "samples-table" | "samples" => Ok(ExportFormat::SamplesTable),
            "cdf-table" | "cdf" => Ok(ExportFormat::CdfTable),
            "summary" => Ok(ExportFormat::Summary),
            _ => Err(Error::config(format!("unknown export format {s:?}"))),
        }
    }
}

pub fn format_results(
    dist: &LatencyDistribution,
    breakdowns: &[LatencyBreakdown],
    format: ExportFormat,
) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::SamplesTable => {
            let cols: Vec<Component> = Component::ALL
                .iter()
                .copied()
                .filter(|&c| breakdowns.iter().any(|b| b.get(c).is_some()))
                .collect();
            out.push_str("index,latency_ms");
            for c in &cols {
                let _ = write!(out, ",{c}");
            }
            out.push('\n');
            for (i, x) in dist.samples().iter().enumerate() {
                let _ = write!(out, "{i},{x}");
                if let Some(b) = breakdowns.get(i) {
                    for &c in &cols {
                        match b.get(c) {
                            Some(v) => {
                                let _ = write!(out, ",{v}");
                            }
                            None => out.push(','),
                        }
                    }
                }
                out.push('\n');
            }
        }
        ExportFormat::CdfTable => {
            out.push_str("latency_ms,cumulative_fraction\n");
            for (x, f) in dist.cdf() {
                let _ = writeln!(out, "{x},{f}");
            }
        }
        ExportFormat::Summary => {
            let s = dist.summary();
            out.push_str("statistic,value\n");
            let _ = writeln!(out, "count,{}", s.count);
            for (k, v) in [
                ("min", s.min),
                ("mean", s.mean),
                ("max", s.max),
                ("p50", s.p50),
                ("p90", s.p90),
                ("p99", s.p99),
                ("p99.99", s.p9999),
            ] {
                let _ = writeln!(out, "{k},{v}");
            }
        }
    }
    out
}

pub fn export_results(
    dist: &LatencyDistribution,
    breakdowns: &[LatencyBreakdown],
    path: &Path,
    format: ExportFormat,
) -> Result<()> {
    std::fs::write(path, format_results(dist, breakdowns, format))
        .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_spec_strings() {
        let t = TrafficSpec::parse("constant:101@64x3", 0).unwrap();
        assert_eq!(t.count, 3);
        assert_eq!(t.packet_size, PacketSize::Fixed(64));
        assert!(TrafficSpec::parse("gaussian:105@64x3", 0).is_err());
        assert!(TrafficSpec::parse("poisson:20@64x3", 0).is_ok());
    }

    #[test]
    fn header_and_comments() {
        let t = parse_trace("# capture\r\narrival_ms,size_bytes\r\n1.5,64\r\n\r\n2,100\r\n").unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(t.packets[1].size_bytes, 100);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse_trace("arrival_ms,size_bytes\n1,64\n-2,64\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }), "{e:?}");
        let e = parse_trace("1,64\nabc,64\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }), "{e:?}");
    }
}
