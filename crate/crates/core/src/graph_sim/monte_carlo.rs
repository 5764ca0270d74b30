use std::io::{self, Write};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{assign_capabilities, assign_capabilities_with, build_graph, CapabilityMode};
use super::peel::{peel_with, sample_erasures, PeelSchedule};
use crate::construction::{averaging_matrix, EtaSpec, Family};
use crate::density_evolution::{de_iterate, ErasureProfile};
use crate::error::{invalid, Result};
use crate::report::fmt_f64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    pub capability_mode: CapabilityMode,
    pub schedule: PeelSchedule,
    /// Worker threads for the trials; `None` uses the global rayon pool.
    pub jobs: Option<usize>,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self {
            capability_mode: CapabilityMode::Deterministic,
            schedule: PeelSchedule::Flooding,
            jobs: None,
        }
    }
}

/// Echo of everything that determines a simulation's output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub family: Family,
    pub positions: usize,
    pub n: usize,
    pub d: usize,
    pub profile: ErasureProfile,
    pub c: f64,
    pub trials: usize,
    pub base_seed: u64,
    pub max_iters: usize,
    pub capability_mode: CapabilityMode,
    pub schedule: PeelSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub iter: usize,
    pub w_mean: f64,
    pub w_stderr: f64,
    pub de_pred: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimReport {
    pub rows: Vec<SimRow>,
    pub trials: usize,
    pub seed: u64,
    pub config: SimConfig,
    /// Fraction of trials that erased every variable node within the budget.
    pub success_rate: f64,
    pub wall_time_secs: f64,
}

impl SimReport {
    /// Largest `|Ŵ − DE|` over the first `iters` iterations.
    pub fn max_gap(&self, iters: usize) -> f64 {
        self.rows
            .iter()
            .take(iters)
            .map(|r| (r.w_mean - r.de_pred).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest nonzero mean the trials can produce: each trial reports a
    /// multiple of one over the check-node count.
    pub fn resolution(&self) -> f64 {
        1.0 / (self.config.positions * self.config.d * self.trials) as f64
    }

    /// Standard error floored at [`SimReport::resolution`], so that
    /// iterations where every trial agrees do not yield a zero-width band.
    pub fn effective_stderr(&self, row: &SimRow) -> f64 {
        row.w_stderr.max(self.resolution())
    }

    /// Iterations (1-based) among the first `iters` where the DE value lies
    /// more than `k` effective standard errors from the estimate.
    pub fn outside_band(&self, iters: usize, k: f64) -> Vec<usize> {
        self.rows
            .iter()
            .take(iters)
            .filter(|r| (r.w_mean - r.de_pred).abs() > k * self.effective_stderr(r))
            .map(|r| r.iter)
            .collect()
    }

    pub fn write_csv(&self, mut w: impl Write) -> io::Result<()> {
        writeln!(w, "iter,W_mean,W_stderr,DE_pred")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.iter,
                fmt_f64(r.w_mean),
                fmt_f64(r.w_stderr),
                fmt_f64(r.de_pred)
            )?;
        }
        Ok(())
    }

    /// Metadata sidecar: seed, config and wall time, without the rows.
    pub fn metadata_json(&self) -> serde_json::Value {
        serde_json::json!({
            "seed": self.seed,
            "trials": self.trials,
            "config": self.config,
            "success_rate": self.success_rate,
            "wall_time_secs": self.wall_time_secs,
        })
    }
}

/// Runs `trials` independent decoding trials; trial `k` is seeded with
/// `base_seed + k`.
pub fn monte_carlo(
    spec: &EtaSpec,
    n: usize,
    profile: &ErasureProfile,
    c: f64,
    trials: usize,
    base_seed: u64,
    max_iters: usize,
) -> Result<SimReport> {
    monte_carlo_with(spec, n, profile, c, trials, base_seed, max_iters, &SimOptions::default())
}

#[allow(clippy::too_many_arguments)]
pub fn monte_carlo_with(
    spec: &EtaSpec,
    n: usize,
    profile: &ErasureProfile,
    c: f64,
    trials: usize,
    base_seed: u64,
    max_iters: usize,
    opts: &SimOptions,
) -> Result<SimReport> {
    if trials == 0 {
        return Err(invalid("at least one trial is required"));
    }
    if max_iters == 0 {
        return Err(invalid("max_iters must be positive"));
    }
    let start = Instant::now();
    let graph = build_graph(spec, n)?;
    if c > n as f64 || !(c >= 0.0) {
        return Err(invalid(format!("c = {c} must lie in [0, n = {n}]")));
    }
    let fixed = match opts.capability_mode {
        CapabilityMode::Deterministic => Some(assign_capabilities(
            &graph,
            profile,
            CapabilityMode::Deterministic,
            base_seed,
        )?),
        CapabilityMode::Random => None,
    };

    let trial = |k: usize| -> Result<(Vec<f64>, bool)> {
        let mut rng = ChaCha8Rng::seed_from_u64(base_seed.wrapping_add(k as u64));
        let owned;
        let g = match &fixed {
            Some(g) => g,
            None => {
                owned = assign_capabilities_with(&graph, profile, CapabilityMode::Random, &mut rng)?;
                &owned
            }
        };
        let mut state = sample_erasures(g, c, &mut rng)?;
        let out = peel_with(g, &mut state, max_iters, opts.schedule);
        Ok((out.w, out.remaining == 0))
    };
    let run_all = || -> Result<Vec<(Vec<f64>, bool)>> {
        (0..trials).into_par_iter().map(trial).collect()
    };
    let results = match opts.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j.max(1))
            .build()
            .map_err(|e| invalid(format!("thread pool: {e}")))?
            .install(run_all)?,
        None => run_all()?,
    };

    let de = de_iterate(&averaging_matrix(spec).to_sparse(), profile, c, max_iters)?;
    let de_pred = de.failure_fraction();
    let m = trials as f64;
    let rows = (0..max_iters)
        .map(|l| {
            // in-order sums keep the output independent of the thread count
            let mean = results.iter().map(|(w, _)| w[l]).sum::<f64>() / m;
            let var = if trials > 1 {
                results.iter().map(|(w, _)| (w[l] - mean).powi(2)).sum::<f64>() / (m - 1.0)
            } else {
                0.0
            };
            SimRow {
                iter: l + 1,
                w_mean: mean,
                w_stderr: (var / m).sqrt(),
                de_pred: de_pred[l],
            }
        })
        .collect();
    let successes = results.iter().filter(|(_, ok)| *ok).count();
    Ok(SimReport {
        rows,
        trials,
        seed: base_seed,
        config: SimConfig {
            family: spec.family(),
            positions: graph.positions(),
            n,
            d: graph.d(),
            profile: profile.clone(),
            c,
            trials,
            base_seed,
            max_iters,
            capability_mode: opts.capability_mode,
            schedule: opts.schedule,
        },
        success_rate: successes as f64 / m,
        wall_time_secs: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{make_pc, make_staircase};

    #[test]
    fn zero_channel_matches_de_exactly() {
        let spec = make_staircase(4).unwrap();
        let t = ErasureProfile::regular(2).unwrap();
        let r = monte_carlo(&spec, 20, &t, 0.0, 3, 0, 5).unwrap();
        assert_eq!(r.rows.len(), 5);
        for row in &r.rows {
            assert_eq!((row.w_mean, row.w_stderr, row.de_pred), (0.0, 0.0, 0.0));
        }
        assert_eq!(r.success_rate, 1.0);
        assert!(r.outside_band(5, 3.0).is_empty());
        assert_eq!(r.resolution(), 1.0 / (4.0 * 10.0 * 3.0));
    }

    #[test]
    fn deterministic_across_job_counts() {
        let spec = make_pc();
        let t = ErasureProfile::regular(2).unwrap();
        let run = |jobs| {
            let opts = SimOptions { jobs, ..SimOptions::default() };
            monte_carlo_with(&spec, 50, &t, 3.0, 12, 99, 8, &opts).unwrap()
        };
        let a = run(Some(1));
        let b = run(Some(4));
        assert_eq!(a.rows, b.rows);
        assert!(a.rows.iter().all(|r| (0.0..=1.0).contains(&r.w_mean) && r.w_stderr >= 0.0));
    }

    #[test]
    fn csv_layout() {
        let spec = make_pc();
        let t = ErasureProfile::regular(2).unwrap();
        let r = monte_carlo(&spec, 10, &t, 1.0, 2, 5, 3).unwrap();
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "iter,W_mean,W_stderr,DE_pred");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].starts_with("1,"));
        assert_eq!(r.metadata_json()["seed"], 5);
    }

    #[test]
    fn random_capabilities_run() {
        let spec = make_staircase(4).unwrap();
        let t = ErasureProfile::new([(2, 0.25), (3, 0.75)]).unwrap();
        let opts = SimOptions { capability_mode: CapabilityMode::Random, ..SimOptions::default() };
        let r = monte_carlo_with(&spec, 20, &t, 2.0, 4, 1, 4, &opts).unwrap();
        assert_eq!(r.config.capability_mode, CapabilityMode::Random);
        assert!(monte_carlo(&spec, 20, &t, 2.0, 4, 1, 4).is_err());
    }

    #[test]
    fn rejects_bad_inputs() {
        let spec = make_pc();
        let t = ErasureProfile::regular(2).unwrap();
        assert!(monte_carlo(&spec, 10, &t, 11.0, 2, 0, 3).is_err());
        assert!(monte_carlo(&spec, 10, &t, 1.0, 0, 0, 3).is_err());
    }
}
