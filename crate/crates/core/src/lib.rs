//! Dynamic-pricing resource allocation for elastic edge offloading.
//!
//! The crate models a single end user (EU) offloading `q` bits to an edge
//! server (ES) that sells CPU frequency and bandwidth. It provides the
//! latency/energy accounting, the pricing and utility functions with their
//! closed-form calculus, the DISC-PSO near-optimal allocation search plus
//! PSO/GA/DE baselines, and a sweep/comparison harness that writes CSV and
//! SVG output.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod anchors;
pub mod harness;
pub mod offload;
pub mod optimizers;
pub mod plot;
pub mod pricing;
pub mod scenario;

#[cfg(test)]
mod testutil;

pub use offload::{Allocation, EnergyBreakdown, TimeBreakdown};
pub use optimizers::{Algorithm, RunResult, SwarmConfig, TrialStats};
pub use pricing::{CurvatureReport, PriceCoefficients, Pricing, UtilitySummary};
pub use scenario::{ChannelSpec, Scenario, SnrMode};
