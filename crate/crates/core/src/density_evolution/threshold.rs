use serde::Serialize;

use super::profile::ErasureProfile;
use super::run::{de_run, DeConfig, Verdict};
use crate::error::{invalid, GpcError, Result};
use crate::matrix::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdOptions {
    /// Initial `[c_lo, c_hi]`; defaults to `[0, 2·t_max + 10]`.
    pub bracket: Option<(f64, f64)>,
    pub bisect_tol: f64,
    pub max_steps: usize,
    /// Upper limit for bracket expansion.
    pub c_cap: f64,
    pub max_iters: usize,
    pub zero_tol: f64,
    pub stall_tol: f64,
    /// Offsets (in multiples of `bisect_tol`) probed on either side of the
    /// located threshold.
    pub spot_offsets: [f64; 2],
}

impl Default for ThresholdOptions {
    fn default() -> Self {
        let de = DeConfig::default();
        Self {
            bracket: None,
            bisect_tol: 1e-6,
            max_steps: 60,
            c_cap: 1e3,
            max_iters: de.max_iters,
            zero_tol: de.zero_tol,
            stall_tol: de.stall_tol,
            spot_offsets: [2.0, 20.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BracketStep {
    pub c: f64,
    pub verdict: Verdict,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdResult {
    pub c_bar: f64,
    pub bracket: (f64, f64),
    pub log: Vec<BracketStep>,
    /// Probes near `c_bar` whose outcome contradicts monotonicity in `c`.
    pub monotonicity_violations: Vec<BracketStep>,
}

fn probe(b: &SparseMatrix, profile: &ErasureProfile, opts: &ThresholdOptions, c: f64) -> Result<BracketStep> {
    let cfg = DeConfig {
        c,
        max_iters: opts.max_iters,
        zero_tol: opts.zero_tol,
        stall_tol: opts.stall_tol,
        record_every: 0,
    };
    let tr = de_run(b, profile, &cfg)?;
    Ok(BracketStep {
        c,
        verdict: tr.verdict,
        iterations: tr.iterations(),
    })
}

/// Largest `c` for which the recursion converges to zero, by bisection.
///
/// An exhausted iteration budget counts as non-convergence.
pub fn de_threshold(
    b: &SparseMatrix,
    profile: &ErasureProfile,
    opts: &ThresholdOptions,
) -> Result<ThresholdResult> {
    if !(opts.bisect_tol > 0.0) {
        return Err(invalid("bisect_tol must be positive"));
    }
    let (mut lo, mut hi) = opts
        .bracket
        .unwrap_or((0.0, 2.0 * f64::from(profile.t_max()) + 10.0));
    if !(lo >= 0.0 && hi > lo) {
        return Err(invalid(format!("bad bracket [{lo}, {hi}]")));
    }
    let mut log = Vec::new();
    let ok = |s: &BracketStep| s.verdict == Verdict::ConvergedToZero;

    loop {
        let s = probe(b, profile, opts, lo)?;
        log.push(s);
        if ok(&s) {
            break;
        }
        if lo == 0.0 {
            return Err(GpcError::NoBracket("no convergence at c = 0".into()));
        }
        lo = if lo < 1e-6 { 0.0 } else { lo / 2.0 };
    }
    loop {
        let s = probe(b, profile, opts, hi)?;
        log.push(s);
        if !ok(&s) {
            break;
        }
        lo = hi;
        hi *= 2.0;
        if hi > opts.c_cap {
            return Err(GpcError::NoBracket(format!(
                "recursion converges for every tested c up to {}",
                opts.c_cap
            )));
        }
    }

    let mut steps = 0;
    while hi - lo > opts.bisect_tol && steps < opts.max_steps {
        let mid = 0.5 * (lo + hi);
        let s = probe(b, profile, opts, mid)?;
        log.push(s);
        if ok(&s) {
            lo = mid;
        } else {
            hi = mid;
        }
        steps += 1;
    }

    let c_bar = 0.5 * (lo + hi);
    let mut monotonicity_violations = Vec::new();
    for k in opts.spot_offsets {
        let below = c_bar - k * opts.bisect_tol;
        if below >= 0.0 {
            let s = probe(b, profile, opts, below)?;
            if !ok(&s) {
                monotonicity_violations.push(s);
            }
        }
        let s = probe(b, profile, opts, c_bar + k * opts.bisect_tol)?;
        if ok(&s) {
            monotonicity_violations.push(s);
        }
    }

    Ok(ThresholdResult {
        c_bar,
        bracket: (lo, hi),
        log,
        monotonicity_violations,
    })
}
