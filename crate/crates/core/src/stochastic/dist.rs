use std::path::Path;
use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::ProcessingProfile;

/// A non-negative random delay (ms). Draws below zero are clamped to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DistSpec {
    Constant { value: f64 },
    Gaussian { mean: f64, std: f64 },
    /// `loc + scale * exp(shape * Z)` with `Z` standard normal.
    LogNormal { shape: f64, loc: f64, scale: f64 },
    /// Exponential gaps with the given mean (Poisson arrivals).
    Exponential { mean: f64 },
    /// Uniform pick from observed values.
    Empirical { samples: Arc<Vec<f64>> },
}

impl DistSpec {
    pub fn constant(value: f64) -> Self {
        DistSpec::Constant { value }
    }

    pub fn gaussian(mean: f64, std: f64) -> Self {
        DistSpec::Gaussian { mean, std }
    }

    pub fn lognormal(shape: f64, loc: f64, scale: f64) -> Self {
        DistSpec::LogNormal { shape, loc, scale }
    }

    pub fn empirical(samples: Vec<f64>) -> Result<Self> {
        let d = DistSpec::Empirical {
            samples: Arc::new(samples),
        };
        d.check()?;
        Ok(d)
    }

    /// One value per line; blank lines and `#` comments are skipped.
    pub fn empirical_from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let mut v = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let x: f64 = line.parse().map_err(|_| Error::Parse {
                line: i + 1,
                msg: format!("not a number: {line:?}"),
            })?;
            v.push(x);
        }
        Self::empirical(v)
    }

    pub fn check(&self) -> Result<()> {
        let ok = match self {
            DistSpec::Constant { value } => value.is_finite(),
            DistSpec::Gaussian { mean, std } => mean.is_finite() && std.is_finite() && *std >= 0.0,
            DistSpec::LogNormal { shape, loc, scale } => {
                shape.is_finite() && *shape >= 0.0 && loc.is_finite() && scale.is_finite() && *scale >= 0.0
            }
            DistSpec::Exponential { mean } => mean.is_finite() && *mean > 0.0,
            DistSpec::Empirical { samples } => !samples.is_empty() && samples.iter().all(|x| x.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::config(format!("invalid distribution {self:?}")))
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, DistSpec::Constant { .. })
    }

    pub fn mean(&self) -> f64 {
        match self {
            DistSpec::Constant { value } => *value,
            DistSpec::Gaussian { mean, .. } => *mean,
            DistSpec::LogNormal { shape, loc, scale } => loc + scale * (shape * shape / 2.0).exp(),
            DistSpec::Exponential { mean } => *mean,
            DistSpec::Empirical { samples } => samples.iter().sum::<f64>() / samples.len() as f64,
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let v = match self {
            DistSpec::Constant { value } => *value,
            DistSpec::Gaussian { mean, std } => {
                let z: f64 = StandardNormal.sample(rng);
                mean + std * z
            }
            DistSpec::LogNormal { shape, loc, scale } => {
                let z: f64 = StandardNormal.sample(rng);
                loc + scale * (shape * z).exp()
            }
            DistSpec::Exponential { mean } => Exp::new(1.0 / mean).map(|e| e.sample(rng)).unwrap_or(0.0),
            DistSpec::Empirical { samples } => samples[rng.gen_range(0..samples.len())],
        };
        v.max(0.0)
    }
}

/// Independent stream for one packet; identical regardless of evaluation order.
pub fn packet_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// A distribution for every processing delay.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    pub l1: DistSpec,
    pub l2: DistSpec,
    pub l2_prime: DistSpec,
    pub l3: DistSpec,
    pub p1: DistSpec,
    pub p2: DistSpec,
    pub p3: DistSpec,
    pub p4: DistSpec,
    pub p5: DistSpec,
    pub r1: DistSpec,
}

impl ProfileSpec {
    pub fn constant(p: &ProcessingProfile) -> Self {
        let c = DistSpec::constant;
        ProfileSpec {
            l1: c(p.l1),
            l2: c(p.l2),
            l2_prime: c(p.l2_prime),
            l3: c(p.l3),
            p1: c(p.p1),
            p2: c(p.p2),
            p3: c(p.p3),
            p4: c(p.p4),
            p5: c(p.p5),
            r1: c(p.r1),
        }
    }

    /// Measured testbed defaults. `l2'`, `l3` and `p5` have no published
    /// value; `l2'` mirrors `l2`.
    pub fn testbed_defaults() -> Self {
        ProfileSpec {
            l1: DistSpec::gaussian(1.464, 0.175),
            l2: DistSpec::constant(0.3),
            l2_prime: DistSpec::constant(0.3),
            l3: DistSpec::constant(0.3),
            p1: DistSpec::constant(0.1),
            p2: DistSpec::constant(0.1),
            p3: DistSpec::constant(0.01),
            p4: DistSpec::lognormal(0.40, 0.27, 0.13),
            p5: DistSpec::constant(0.1),
            r1: DistSpec::constant(0.5),
        }
    }

    fn fields(&self) -> [&DistSpec; 10] {
        [
            &self.l1,
            &self.l2,
            &self.l2_prime,
            &self.l3,
            &self.p1,
            &self.p2,
            &self.p3,
            &self.p4,
            &self.p5,
            &self.r1,
        ]
    }

    pub fn check(&self) -> Result<()> {
        self.fields().iter().try_for_each(|d| d.check())
    }

    pub fn is_deterministic(&self) -> bool {
        self.fields().iter().all(|d| d.is_constant())
    }

    /// Draws in a fixed field order.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> ProcessingProfile {
        ProcessingProfile {
            l1: self.l1.draw(rng),
            l2: self.l2.draw(rng),
            l2_prime: self.l2_prime.draw(rng),
            l3: self.l3.draw(rng),
            p1: self.p1.draw(rng),
            p2: self.p2.draw(rng),
            p3: self.p3.draw(rng),
            p4: self.p4.draw(rng),
            p5: self.p5.draw(rng),
            r1: self.r1.draw(rng),
        }
    }

    /// Mean of every field, as a deterministic profile.
    pub fn means(&self) -> ProcessingProfile {
        ProcessingProfile {
            l1: self.l1.mean(),
            l2: self.l2.mean(),
            l2_prime: self.l2_prime.mean(),
            l3: self.l3.mean(),
            p1: self.p1.mean(),
            p2: self.p2.mean(),
            p3: self.p3.mean(),
            p4: self.p4.mean(),
            p5: self.p5.mean(),
            r1: self.r1.mean(),
        }
    }
}

/// `draw(spec)` for one packet stream.
pub fn draw(spec: &DistSpec, rng: &mut ChaCha8Rng) -> f64 {
    spec.draw(rng)
}
