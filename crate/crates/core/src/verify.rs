//! Named numerical verification suites, each returning a per-check report.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::construction::{averaging_matrix, make_ensemble_emulating, make_staircase, EnsembleParams};
use crate::density_evolution::{
    check_domination, de_iterate, ensemble_averaging_matrix, reduce_symmetric, ErasureProfile,
};
use crate::error::{GpcError, Result};
use crate::graph_sim::{monte_carlo_with, SimOptions};
use crate::potential::{
    convexity_identity_check, verify_regular_optimal, OptimalityOptions,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Equivalence,
    Domination,
    Convexity,
    RegularOptimal,
    Theorem1,
}

impl Suite {
    pub const ALL: [Suite; 5] = [
        Suite::Equivalence,
        Suite::Domination,
        Suite::Convexity,
        Suite::RegularOptimal,
        Suite::Theorem1,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Equivalence => "equivalence",
            Suite::Domination => "domination",
            Suite::Convexity => "convexity",
            Suite::RegularOptimal => "regular-optimal",
            Suite::Theorem1 => "theorem1",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Suite {
    type Err = GpcError;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.as_str() == s.replace('_', "-"))
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|s| s.as_str()).collect();
                GpcError::Parse(format!("unknown suite '{s}'; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Measured quantity compared against `tolerance`.
    pub value: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub checks: Vec<Check>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Monte Carlo trials for `theorem1`.
    pub trials: usize,
    /// Sampled profiles per mean for `regular-optimal`.
    pub samples: usize,
    pub jobs: Option<usize>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { seed: 1, trials: 100, samples: 50, jobs: None }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<SuiteReport> {
    let checks = match suite {
        Suite::Equivalence => equivalence()?,
        Suite::Domination => domination()?,
        Suite::Convexity => convexity()?,
        Suite::RegularOptimal => regular_optimal(opts)?,
        Suite::Theorem1 => theorem1(opts)?,
    };
    Ok(SuiteReport { suite, checks })
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Largest deviation over `iters` iterations between the ensemble recursion
/// and the full deterministic code (every position of each block compared
/// with its ensemble position), and between the ensemble and the reduced
/// system.
pub fn ensemble_equivalence_gap(
    params: EnsembleParams,
    profile: &ErasureProfile,
    c: f64,
    iters: usize,
) -> Result<(f64, f64)> {
    let spec = make_ensemble_emulating(params)?;
    let reduction = reduce_symmetric(&spec)?;
    let ens = de_iterate(&ensemble_averaging_matrix(params).to_sparse(), profile, c, iters)?;
    let full = de_iterate(&averaging_matrix(&spec).to_sparse(), profile, c, iters)?;
    let red = de_iterate(&reduction.averaging.to_sparse(), profile, c, iters)?;
    let stride = reduction.stride;
    let (mut full_gap, mut red_gap) = (0.0f64, 0.0f64);
    for ((e, f), r) in ens.records.iter().zip(&full.records).zip(&red.records) {
        for (i, &xe) in e.x.iter().enumerate() {
            for &xf in &f.x[stride * i..stride * (i + 1)] {
                full_gap = full_gap.max((xf - xe).abs());
            }
        }
        red_gap = red_gap.max(sup_diff(&e.x, &r.x));
    }
    Ok((full_gap, red_gap))
}

fn equivalence() -> Result<Vec<Check>> {
    const TOL: f64 = 1e-10;
    let mut checks = Vec::new();
    for (l, w) in [(6, 2), (6, 3), (10, 4)] {
        let params = EnsembleParams::new(l, w)?;
        for t in [2u32, 4] {
            let profile = ErasureProfile::regular(t)?;
            for c in [t as f64, 2.0 * t as f64] {
                let (full, red) = ensemble_equivalence_gap(params, &profile, c, 200)?;
                let gap = full.max(red);
                checks.push(Check {
                    name: format!("L={l} w={w} t={t} c={c}"),
                    passed: gap < TOL,
                    value: gap,
                    tolerance: TOL,
                    detail: format!("full-code gap {full:.3e}, reduced gap {red:.3e}"),
                });
            }
        }
    }
    Ok(checks)
}

fn domination() -> Result<Vec<Check>> {
    let profile = ErasureProfile::regular(4)?;
    let mut checks = Vec::new();
    for (l, w) in [(20, 3), (40, 5)] {
        for c in [5.0, 7.0] {
            let r = check_domination(l, w, &profile, c, 200)?;
            checks.push(Check {
                name: format!("L={l} w={w} t=4 c={c}"),
                passed: r.holds(),
                value: r.min_margin,
                tolerance: -crate::density_evolution::DOMINATION_SLACK,
                detail: match r.first_violation {
                    Some(v) => format!("violated at iteration {} position {}", v.iter, v.position),
                    None => format!("min margin {:.3e}", r.min_margin),
                },
            });
        }
    }
    Ok(checks)
}

fn convexity() -> Result<Vec<Check>> {
    const TOL: f64 = 1e-12;
    let grid: Vec<f64> = (0..=500).map(|k| k as f64 * 0.1).collect();
    (2..=20)
        .map(|t| {
            let r = convexity_identity_check(t, &grid)?;
            Ok(Check {
                name: format!("t={t}"),
                passed: r.passed(TOL) && r.strict_for_positive_x,
                value: r.max_residual,
                tolerance: TOL,
                detail: format!("strictly convex on x > 0: {}", r.strict_for_positive_x),
            })
        })
        .collect()
}

fn regular_optimal(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let o = OptimalityOptions::default();
    [2.0, 3.5, 5.0]
        .into_iter()
        .map(|t_bar| {
            let r = verify_regular_optimal(t_bar, opts.samples, opts.seed, &o)?;
            let worst = r.samples.iter().map(|s| s.excess).fold(f64::NEG_INFINITY, f64::max);
            Ok(Check {
                name: format!("t_bar={t_bar}"),
                passed: r.passed(),
                value: worst,
                tolerance: o.tol,
                detail: format!(
                    "reference {:.6}, {} samples, {} threshold and {} loss violations",
                    r.reference_c_p,
                    r.samples.len(),
                    r.threshold_violations,
                    r.loss_violations
                ),
            })
        })
        .collect()
}

fn theorem1(opts: &VerifyOptions) -> Result<Vec<Check>> {
    let spec = make_staircase(8)?;
    let profile = ErasureProfile::regular(4)?;
    let sim = SimOptions { jobs: opts.jobs, ..SimOptions::default() };
    let r = monte_carlo_with(&spec, 2000, &profile, 5.0, opts.trials, opts.seed, 10, &sim)?;
    Ok(r.rows
        .iter()
        .map(|row| {
            let gap = (row.w_mean - row.de_pred).abs();
            let band = 3.0 * r.effective_stderr(row);
            Check {
                name: format!("staircase L=8 n=2000 t=4 c=5 iter={}", row.iter),
                passed: gap <= band,
                value: gap,
                tolerance: band,
                detail: format!("W {:.6e} +- {:.2e}, DE {:.6e}", row.w_mean, row.w_stderr, row.de_pred),
            }
        })
        .collect())
}
