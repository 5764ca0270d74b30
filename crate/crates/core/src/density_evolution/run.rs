use serde::{Deserialize, Serialize};

use super::profile::ErasureProfile;
use crate::error::{invalid, GpcError, Result};
use crate::matrix::SparseMatrix;

/// Stopping rules for a recursion run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeConfig {
    /// Channel quality: expected erasures per component word.
    pub c: f64,
    pub max_iters: usize,
    /// Success once `max_i x_i < zero_tol`.
    pub zero_tol: f64,
    /// Failure once the sup-norm step drops below this while `x` is nonzero.
    pub stall_tol: f64,
    /// Keep full state vectors only every `record_every` iterations (the
    /// last iteration is always kept). Zero keeps none.
    pub record_every: usize,
}

impl DeConfig {
    pub fn new(c: f64) -> Self {
        Self {
            c,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(invalid(format!("c must be finite and >= 0, got {}", self.c)));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        if !(self.zero_tol > 0.0) || !(self.stall_tol > 0.0) {
            return Err(invalid("zero_tol and stall_tol must be positive"));
        }
        Ok(())
    }
}

impl Default for DeConfig {
    fn default() -> Self {
        Self {
            c: 0.0,
            max_iters: 100_000,
            zero_tol: 1e-9,
            stall_tol: 1e-13,
            record_every: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConvergedToZero,
    StalledNonzero,
    IterationBudgetExhausted,
}

/// Per-iteration scalar summary; always kept for every iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterSummary {
    pub iter: usize,
    /// `(1/Ltot) Σ_i z_i`.
    pub failure_fraction: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub x_mean: f64,
}

/// Full state at iteration `iter` (`iter >= 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct StateRecord {
    pub iter: usize,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DeTrace {
    pub summaries: Vec<IterSummary>,
    pub records: Vec<StateRecord>,
    pub final_x: Vec<f64>,
    pub verdict: Verdict,
}

impl DeTrace {
    pub fn iterations(&self) -> usize {
        self.summaries.len()
    }

    pub fn failure_fraction(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.failure_fraction).collect()
    }

    /// State vector `x` at iteration `iter`, if it was recorded.
    pub fn x_at(&self, iter: usize) -> Option<&[f64]> {
        self.records
            .iter()
            .find(|r| r.iter == iter)
            .map(|r| r.x.as_slice())
    }

    /// Whether recorded `x` vectors never increase by more than `tol`.
    pub fn is_monotone(&self, tol: f64) -> bool {
        let mut prev: Option<&[f64]> = None;
        for r in &self.records {
            if let Some(p) = prev {
                if r.x.iter().zip(p).any(|(a, b)| *a > *b + tol) {
                    return false;
                }
            } else if r.x.iter().any(|&v| v > 1.0 + tol) {
                return false;
            }
            prev = Some(&r.x);
        }
        true
    }
}

/// One step: `x' = h(Bx)`, `z = Σ τ_t Ψ_{≥t+1}(cBx)`.
pub fn de_step(
    b: &SparseMatrix,
    profile: &ErasureProfile,
    c: f64,
    x: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    if b.rows() != b.cols() {
        return Err(GpcError::DimensionMismatch {
            expected: b.rows(),
            actual: b.cols(),
        });
    }
    if x.len() != b.cols() {
        return Err(GpcError::DimensionMismatch {
            expected: b.cols(),
            actual: x.len(),
        });
    }
    let mut x_next = vec![0.0; x.len()];
    let mut z = vec![0.0; x.len()];
    step_into(b, profile, c, x, &mut x_next, &mut z);
    Ok((x_next, z))
}

fn step_into(
    b: &SparseMatrix,
    profile: &ErasureProfile,
    c: f64,
    x: &[f64],
    x_next: &mut [f64],
    z: &mut [f64],
) {
    b.mul_vec_into(x, x_next);
    for (xn, zi) in x_next.iter_mut().zip(z.iter_mut()) {
        let u = c * *xn;
        *zi = profile.failure_mix(u);
        *xn = profile.tail_mix(u);
    }
}

fn summarize(iter: usize, x: &[f64], z: &[f64]) -> IterSummary {
    let n = x.len() as f64;
    IterSummary {
        iter,
        failure_fraction: z.iter().sum::<f64>() / n,
        x_min: x.iter().copied().fold(f64::INFINITY, f64::min),
        x_max: x.iter().copied().fold(0.0, f64::max),
        x_mean: x.iter().sum::<f64>() / n,
    }
}

fn run(
    b: &SparseMatrix,
    profile: &ErasureProfile,
    config: &DeConfig,
    stop_early: bool,
) -> Result<DeTrace> {
    config.validate()?;
    if b.rows() != b.cols() {
        return Err(GpcError::DimensionMismatch {
            expected: b.rows(),
            actual: b.cols(),
        });
    }
    let n = b.rows();
    let mut x = vec![1.0; n];
    let mut x_next = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut summaries = Vec::new();
    let mut records = Vec::new();
    let mut verdict = Verdict::IterationBudgetExhausted;

    for iter in 1..=config.max_iters {
        step_into(b, profile, config.c, &x, &mut x_next, &mut z);
        summaries.push(summarize(iter, &x_next, &z));

        let x_max = x_next.iter().copied().fold(0.0, f64::max);
        let step = x
            .iter()
            .zip(&x_next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        debug_assert!(
            x_next.iter().zip(&x).all(|(a, b)| *a <= *b + 1e-12),
            "recursion must be non-increasing"
        );
        std::mem::swap(&mut x, &mut x_next);

        let done = if x_max < config.zero_tol {
            Some(Verdict::ConvergedToZero)
        } else if step < config.stall_tol {
            Some(Verdict::StalledNonzero)
        } else {
            None
        };
        let last = iter == config.max_iters || (stop_early && done.is_some());
        if config.record_every > 0 && (iter % config.record_every == 0 || last) {
            records.push(StateRecord {
                iter,
                x: x.clone(),
                z: z.clone(),
            });
        }
        if last {
            verdict = match done {
                Some(v) => v,
                None if x_max < config.zero_tol => Verdict::ConvergedToZero,
                None => Verdict::IterationBudgetExhausted,
            };
            break;
        }
    }
    Ok(DeTrace {
        summaries,
        records,
        final_x: x,
        verdict,
    })
}

/// Iterates from `x⁽⁰⁾ = 1` until a verdict is reached.
pub fn de_run(b: &SparseMatrix, profile: &ErasureProfile, config: &DeConfig) -> Result<DeTrace> {
    run(b, profile, config, true)
}

/// Runs exactly `iters` iterations, ignoring the early-stopping rules, and
/// records every state. The verdict reflects the final state.
pub fn de_iterate(
    b: &SparseMatrix,
    profile: &ErasureProfile,
    c: f64,
    iters: usize,
) -> Result<DeTrace> {
    let config = DeConfig {
        c,
        max_iters: iters,
        record_every: 1,
        ..DeConfig::default()
    };
    run(b, profile, &config, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{averaging_matrix, make_pc, make_staircase};
    use crate::density_evolution::poisson::pmf;

    fn t(t: u32) -> ErasureProfile {
        ErasureProfile::regular(t).unwrap()
    }

    #[test]
    fn step_zero_channel_and_zero_state() {
        let b = averaging_matrix(&make_staircase(5).unwrap()).to_sparse();
        let (x, z) = de_step(&b, &t(3), 0.0, &[1.0; 5]).unwrap();
        assert!(x.iter().chain(&z).all(|&v| v == 0.0));
        let (x, _) = de_step(&b, &t(3), 7.0, &[0.0; 5]).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn step_pc_by_pmf() {
        let b = averaging_matrix(&make_pc()).to_sparse();
        let (x, z) = de_step(&b, &t(2), 3.0, &[1.0, 1.0]).unwrap();
        let expect = 1.0 - pmf(0, 3.0) - pmf(1, 3.0);
        let expect_z = expect - pmf(2, 3.0);
        for i in 0..2 {
            assert!((x[i] - expect).abs() < 1e-15);
            assert!((z[i] - expect_z).abs() < 1e-15);
        }
    }

    #[test]
    fn step_dimension_mismatch() {
        let b = averaging_matrix(&make_pc()).to_sparse();
        assert!(matches!(
            de_step(&b, &t(2), 1.0, &[1.0; 3]),
            Err(GpcError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn zero_channel_converges_in_one_iteration() {
        let b = averaging_matrix(&make_staircase(7).unwrap()).to_sparse();
        let tr = de_run(&b, &t(4), &DeConfig::new(0.0)).unwrap();
        assert_eq!(tr.verdict, Verdict::ConvergedToZero);
        assert_eq!(tr.iterations(), 1);
    }

    #[test]
    fn staircase_far_above_threshold_stalls_near_one() {
        let b = averaging_matrix(&make_staircase(20).unwrap()).to_sparse();
        let prof = t(4);
        let tr = de_run(&b, &prof, &DeConfig::new(16.0)).unwrap();
        assert_eq!(tr.verdict, Verdict::StalledNonzero);
        for &v in &tr.final_x[2..18] {
            assert!(v > 0.99);
        }
        // applying one more step leaves the state in place
        let (again, _) = de_step(&b, &prof, 16.0, &tr.final_x).unwrap();
        for (a, b) in again.iter().zip(&tr.final_x) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn failure_fraction_is_mean_of_z() {
        let b = averaging_matrix(&make_staircase(8).unwrap()).to_sparse();
        let tr = de_iterate(&b, &t(4), 5.0, 12).unwrap();
        for (s, r) in tr.summaries.iter().zip(&tr.records) {
            let mean = r.z.iter().sum::<f64>() / 8.0;
            assert!((s.failure_fraction - mean).abs() < 1e-16);
        }
        assert!(tr.is_monotone(0.0));
    }

    #[test]
    fn thinning_keeps_last() {
        let b = averaging_matrix(&make_staircase(8).unwrap()).to_sparse();
        let cfg = DeConfig {
            record_every: 5,
            ..DeConfig::new(5.0)
        };
        let tr = de_run(&b, &t(4), &cfg).unwrap();
        assert_eq!(tr.records.last().unwrap().iter, tr.iterations());
        assert!(tr.records.iter().rev().skip(1).all(|r| r.iter % 5 == 0));
        assert_eq!(tr.summaries.len(), tr.iterations());
    }

    #[test]
    fn invalid_config_rejected() {
        let b = averaging_matrix(&make_pc()).to_sparse();
        let bad = [
            DeConfig { max_iters: 0, ..DeConfig::new(1.0) },
            DeConfig { zero_tol: 0.0, ..DeConfig::new(1.0) },
            DeConfig::new(-1.0),
        ];
        for cfg in bad {
            assert!(de_run(&b, &t(2), &cfg).is_err());
        }
    }
}
