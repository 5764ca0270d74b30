//! Numerical evidence that (semi-)regular profiles maximise the potential
//! threshold at fixed mean capability.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::loss::loss_mixture;
use super::{loss_single, potential_threshold_with, semi_regular, PotentialThresholdOptions};
use crate::density_evolution::poisson::{loss_int, pmf};
use crate::density_evolution::ErasureProfile;
use crate::error::{invalid, Result};

/// Random profile over `{1, …, t_max}` with mean exactly `t_bar`.
///
/// A uniform point of the simplex is drawn, then mass is moved pairwise
/// between the extremes of the support until the mean matches.
pub fn sample_profile(t_bar: f64, t_max: u32, rng: &mut impl Rng) -> Result<ErasureProfile> {
    if !(t_bar >= 1.0) || t_bar > f64::from(t_max) {
        return Err(invalid(format!("cannot reach mean {t_bar} on support 1..={t_max}")));
    }
    let n = t_max as usize;
    let mut tau: Vec<f64> = (0..n).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = tau.iter().sum();
    tau.iter_mut().for_each(|v| *v /= total);

    let mean = |tau: &[f64]| -> f64 { tau.iter().enumerate().map(|(i, p)| (i + 1) as f64 * p).sum() };
    for _ in 0..2 * n {
        let gap = mean(&tau) - t_bar;
        if gap.abs() < 1e-14 {
            break;
        }
        if gap > 0.0 {
            // shift mass from the highest occupied capability down to 1
            let hi = (1..n).rev().find(|&i| tau[i] > 0.0).expect("mean above 1 needs mass above 1");
            let delta = tau[hi].min(gap / hi as f64);
            tau[hi] -= delta;
            tau[0] += delta;
        } else {
            // shift mass from the lowest occupied capability up to t_max
            let lo = (0..n - 1).find(|&i| tau[i] > 0.0).expect("mean below t_max needs mass below it");
            let delta = tau[lo].min(-gap / (n - 1 - lo) as f64);
            tau[lo] -= delta;
            tau[n - 1] += delta;
        }
    }
    ErasureProfile::new(tau.into_iter().enumerate().map(|(i, p)| (i as u32 + 1, p.max(0.0))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OptimalityOptions {
    /// Support bound for sampled profiles; defaults to `⌈t̄⌉ + 4`.
    pub t_max: Option<u32>,
    /// Allowed excess of a sample's threshold over the regular one.
    pub tol: f64,
    pub threshold: PotentialThresholdOptions,
    /// Loss comparison grid on `[0, x_max]` with `x_points` samples.
    pub x_max: f64,
    pub x_points: usize,
}

impl Default for OptimalityOptions {
    fn default() -> Self {
        Self {
            t_max: None,
            tol: 1e-4,
            threshold: PotentialThresholdOptions::default(),
            x_max: 50.0,
            x_points: 501,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfileSample {
    pub profile: ErasureProfile,
    pub t_bar: f64,
    pub c_p: f64,
    /// `c̄_p(τ) - c̄_p(τ_reg)`; should be `<= tol`.
    pub excess: f64,
    /// `min_x [𝓛_τ(x) - 𝓛(t̄, x)]`; should be `>= 0`.
    pub min_loss_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimalityReport {
    pub t_bar: f64,
    pub seed: u64,
    pub t_max: u32,
    pub reference_c_p: f64,
    pub samples: Vec<ProfileSample>,
    pub threshold_violations: usize,
    pub loss_violations: usize,
}

impl OptimalityReport {
    pub fn passed(&self) -> bool {
        self.threshold_violations == 0 && self.loss_violations == 0
    }

    pub fn best(&self) -> Option<&ProfileSample> {
        self.samples.iter().max_by(|a, b| a.c_p.total_cmp(&b.c_p))
    }
}

/// Samples `sample_count` profiles with mean `t_bar` and compares their
/// potential thresholds and losses against the (semi-)regular profile.
///
/// Sample `i` is drawn from a generator seeded with `seed + i`, so results do
/// not depend on thread scheduling.
pub fn verify_regular_optimal(
    t_bar: f64,
    sample_count: usize,
    seed: u64,
    opts: &OptimalityOptions,
) -> Result<OptimalityReport> {
    if !(t_bar >= 2.0) {
        return Err(invalid(format!("optimality holds for t_bar >= 2, got {t_bar}")));
    }
    let t_max = opts.t_max.unwrap_or(t_bar.ceil() as u32 + 4);
    let reg = semi_regular(t_bar)?;
    let reference_c_p = potential_threshold_with(&reg, &opts.threshold)?;
    let xs: Vec<f64> = (0..opts.x_points)
        .map(|k| opts.x_max * k as f64 / (opts.x_points.max(2) - 1) as f64)
        .collect();

    let samples = (0..sample_count)
        .into_par_iter()
        .map(|i| -> Result<ProfileSample> {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
            let profile = sample_profile(t_bar, t_max, &mut rng)?;
            let c_p = potential_threshold_with(&profile, &opts.threshold)?;
            let min_loss_gap = xs
                .iter()
                .map(|&x| loss_mixture(&profile, x) - loss_single(t_bar, x).expect("t_bar >= 2"))
                .fold(f64::INFINITY, f64::min);
            Ok(ProfileSample {
                t_bar: profile.t_bar(),
                profile,
                c_p,
                excess: c_p - reference_c_p,
                min_loss_gap,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let threshold_violations = samples.iter().filter(|s| s.excess > opts.tol).count();
    let loss_violations = samples.iter().filter(|s| s.min_loss_gap < -1e-12).count();
    Ok(OptimalityReport {
        t_bar,
        seed,
        t_max,
        reference_c_p,
        samples,
        threshold_violations,
        loss_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvexityReport {
    pub t: u32,
    pub points: usize,
    /// `max |𝓛(t-1,x) + 𝓛(t+1,x) - 2𝓛(t,x) - Ψ_{=t}(x)|`.
    pub max_residual: f64,
    /// Whether `𝓛(t-1,x) + 𝓛(t+1,x) - 2𝓛(t,x) > 0` at every sampled `x > 0`
    /// where `Ψ_{=t}(x)` exceeds the rounding error of the second difference.
    pub strict_for_positive_x: bool,
}

impl ConvexityReport {
    pub fn passed(&self, tol: f64) -> bool {
        self.max_residual < tol
    }
}

/// Second difference of `𝓛(·, x)` equals `Ψ_{=t}(x)`.
pub fn convexity_identity_check(t: u32, x_grid: &[f64]) -> Result<ConvexityReport> {
    if t < 2 {
        return Err(invalid(format!("identity needs t >= 2, got {t}")));
    }
    let mut max_residual = 0.0f64;
    let mut strict = true;
    for &x in x_grid {
        if !(x >= 0.0) {
            return Err(invalid(format!("grid point {x} is negative")));
        }
        let second = loss_int(t - 1, x) + loss_int(t + 1, x) - 2.0 * loss_int(t, x);
        let mass = pmf(t, x);
        max_residual = max_residual.max((second - mass).abs());
        if x > 0.0 && mass > 1e-13 * f64::from(t + 1) && !(second > 0.0) {
            strict = false;
        }
    }
    Ok(ConvexityReport {
        t,
        points: x_grid.len(),
        max_residual,
        strict_for_positive_x: strict,
    })
}
