//! Finite-length simulation: Tanner graphs built from η, i.i.d. erasures
//! with probability `c/n`, and bounded-distance peeling.

mod graph;
mod monte_carlo;
mod peel;

pub use graph::{assign_capabilities, build_graph, CapabilityMode, TannerGraph};
pub use monte_carlo::{monte_carlo, monte_carlo_with, SimConfig, SimOptions, SimReport, SimRow};
pub use peel::{peel, peel_with, sample_erasures, ErasureState, PeelOutcome, PeelSchedule};
