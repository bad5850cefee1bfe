//! Search-space enumeration, pruning and configuration search.

mod enumerate;
mod search;
mod space;

pub use enumerate::{count_valid, enumerate_valid, is_valid, sample_valid, Pinning};
pub use search::{
    find_all, optimize, optimize_points, reliability_check, FindAllOptions, FindAllResult, Match,
    Objective, OptimizeResult, ReliabilityTarget, SearchOptions,
};
pub use space::{expand_ellipses, Point, SearchSpace, AXES, STANDARD_PERIODS_MS};
