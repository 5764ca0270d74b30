//! Deterministic generalized product codes over the binary erasure channel.
//!
//! * [`construction`]: η-matrices for product, staircase, braided and
//!   ensemble-emulating codes, and their averaging matrices.
//! * [`density_evolution`]: the high-rate recursion `x ← h(Bx)`, ensemble
//!   forms, symmetry reduction and decoding thresholds.
//! * [`potential`]: single-system potentials, potential thresholds and the
//!   erasure-profile optimality machinery.
//! * [`graph_sim`]: finite Tanner graphs, flooding peeling and Monte Carlo
//!   estimates of the failure fraction.
//! * [`verify`]: named numerical verification suites.

pub mod construction;
pub mod density_evolution;
pub mod error;
pub mod graph_sim;
pub mod matrix;
pub mod potential;
pub mod report;
pub mod verify;

pub use construction::{
    averaging_matrix, validate, AveragingMatrix, Diagnostics, EnsembleParams, EtaSpec, Family,
};
pub use density_evolution::{de_run, DeConfig, DeTrace, ErasureProfile, Verdict};
pub use error::{GpcError, Result};
pub use graph_sim::{monte_carlo, SimReport, TannerGraph};
pub use matrix::{BinMatrix, RatMatrix, SparseMatrix};
pub use potential::{potential_threshold, semi_regular, PotentialEval};
