//! Random processing delays, Monte-Carlo latency distributions and fitting.

mod dist;
mod distribution;
mod engine;
mod fit;
mod wasserstein;

pub use dist::{draw, packet_rng, DistSpec, ProfileSpec};
pub use distribution::{nearest_rank, select_percentile, LatencyDistribution, Summary};
pub use engine::{draw_profiles, evaluate_totals, latency_distribution, latency_distribution_with, DistributionRun};
pub use fit::{fit_learned_distribution, linspace_step, FitGrid, FitResult, FitTarget};
pub use wasserstein::{wasserstein, QUANTILE_GRID};
