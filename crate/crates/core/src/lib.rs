//! Slot-level latency model for 5G NR.
//!
//! Closed-form per-packet pipelines for the grant-based uplink, grant-free
//! uplink and downlink over common TDD, mini-slot TDD and FDD; a buffer
//! simulation for packet trains; a brute-force reference timeline; a
//! Monte-Carlo layer over random processing delays; and a configuration
//! search over the standard's parameter grid.

pub mod breakdown;
pub mod downlink;
pub mod duplex;
pub mod error;
pub mod eval;
pub mod grant_free;
pub mod model;
pub mod optimizer;
pub mod oracle;
pub mod profile;
pub mod slot;
pub mod sr;
pub mod stochastic;
pub mod tables;
pub mod traffic;
pub mod train;
pub mod uplink;

pub use breakdown::{Component, LatencyBreakdown};
pub use error::{Error, Result};
pub use eval::{Access, Direction, Evaluator, Mode};
pub use model::{
    ControlAndTiming, Duplexing, FrequencyRange, GrantFreeConfig, LinkBudget, MiniSlotSplit,
    SlotGrid, SrBound, SystemConfig, TddPattern,
};
pub use profile::ProcessingProfile;
pub use traffic::{Packet, PacketTrace, TrafficSpec};
