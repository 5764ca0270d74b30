//! Density evolution for deterministic and ensemble-based coupled product
//! codes, decoding thresholds, and the braided domination check.
//!
//! With a mixture profile the failure vector is `z = Σ τ_t Ψ_{≥t+1}(cBx)`,
//! the natural extension of the fixed-`t` rule: a check node fails when it
//! sees more erasures than its own capability.

mod domination;
mod ensemble;
pub(crate) mod poisson;
mod profile;
mod reduce;
mod run;
mod threshold;

pub use domination::{check_domination, DominationReport, Violation, DOMINATION_SLACK};
pub use ensemble::{
    ensemble_averaging_matrix, ensemble_de_run, ensemble_vn_iterate, modified_ensemble_iterate,
};
pub use poisson::{poisson_pmf, poisson_tail};
pub use profile::{h_eval, ErasureProfile};
pub use reduce::{reduce_symmetric, SymmetryReduction};
pub use run::{de_iterate, de_run, de_step, DeConfig, DeTrace, IterSummary, StateRecord, Verdict};
pub use threshold::{de_threshold, BracketStep, ThresholdOptions, ThresholdResult};
