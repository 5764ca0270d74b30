//! Single-system potentials of the scalar recursion `x ← h(x)` and the
//! thresholds derived from them.
//!
//! With `H(x) = ∫₀ˣ h` and `h(x) = Σ τ_t Ψ_{≥t}(cx)`, integration by parts
//! gives `H(x) = x - (t̄ - 𝓛_τ(cx))/c`, so
//! `V_s(x) = x²/2 - x + (t̄ - 𝓛_τ(cx))/c`.

mod loss;
mod optimality;

pub use loss::{loss_mixture, loss_single};
pub use optimality::{
    convexity_identity_check, sample_profile, verify_regular_optimal, ConvexityReport,
    OptimalityOptions, OptimalityReport, ProfileSample,
};

use serde::Serialize;

use crate::density_evolution::{h_eval, ErasureProfile};
use crate::error::{invalid, GpcError, Result};
use loss::excess_mix;

fn check_c(c: f64) -> Result<()> {
    if !(c > 0.0) || !c.is_finite() {
        return Err(invalid(format!("potential needs c > 0, got {c}")));
    }
    Ok(())
}

/// `H(x) = ∫₀ˣ h(z) dz` in closed form.
pub fn h_integral(x: f64, c: f64, profile: &ErasureProfile) -> Result<f64> {
    check_c(c)?;
    Ok(excess_mix(profile, c * x) / c)
}

/// `V_s(x; c, τ) = x²/2 - H(x)`.
pub fn potential_vs(x: f64, c: f64, profile: &ErasureProfile) -> Result<f64> {
    check_c(c)?;
    Ok(vs(x, c, profile))
}

fn vs(x: f64, c: f64, profile: &ErasureProfile) -> f64 {
    0.5 * x * x - excess_mix(profile, c * x) / c
}

/// `U_s(x; c) = h(x)x - H(x) - H(h(x))`, the potential of `x ← h(h(x))`.
pub fn potential_us(x: f64, c: f64, profile: &ErasureProfile) -> Result<f64> {
    check_c(c)?;
    let hx = h_eval(profile, c, x);
    Ok(hx * x - excess_mix(profile, c * x) / c - excess_mix(profile, c * hx) / c)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PotentialEval {
    pub x_star: f64,
    pub v_min: f64,
    /// `(x, V_s(x))` on the search grid, when requested.
    pub samples: Option<Vec<(f64, f64)>>,
}

pub const DEFAULT_GRID: usize = 10_000;

/// Local minima refined per evaluation; the grid rarely has more than two.
const MAX_REFINED: usize = 8;

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Global minimum of `V_s(·; c)` on `[0, 1]`: dense grid, then golden-section
/// refinement around every grid local minimum.
pub fn min_vs(c: f64, profile: &ErasureProfile) -> Result<PotentialEval> {
    min_vs_with(c, profile, DEFAULT_GRID, false)
}

pub fn min_vs_with(
    c: f64,
    profile: &ErasureProfile,
    grid: usize,
    keep_samples: bool,
) -> Result<PotentialEval> {
    check_c(c)?;
    if grid < 2 {
        return Err(invalid("grid needs at least two cells"));
    }
    let xs: Vec<f64> = (0..=grid).map(|k| k as f64 / grid as f64).collect();
    let vals: Vec<f64> = xs.iter().map(|&x| vs(x, c, profile)).collect();

    let mut minima: Vec<usize> = (0..=grid)
        .filter(|&k| {
            (k == 0 || vals[k] <= vals[k - 1]) && (k == grid || vals[k] <= vals[k + 1])
        })
        .collect();
    minima.sort_by(|&a, &b| vals[a].total_cmp(&vals[b]));
    minima.truncate(MAX_REFINED);

    // x = 0 is always a stationary point with V = 0
    let (mut x_star, mut v_min) = (0.0, 0.0);
    for k in minima {
        let a = xs[k.saturating_sub(1)];
        let b = xs[(k + 1).min(grid)];
        let (x, v) = golden_min(|x| vs(x, c, profile), a, b, 1e-10);
        let (x, v) = if vals[k] < v { (xs[k], vals[k]) } else { (x, v) };
        if v < v_min {
            x_star = x;
            v_min = v;
        }
    }
    Ok(PotentialEval {
        x_star,
        v_min,
        samples: keep_samples.then(|| xs.into_iter().zip(vals).collect()),
    })
}

/// Slack in the sign test `min V_s >= 0`.
pub const POTENTIAL_SLACK: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PotentialThresholdOptions {
    /// Defaults to `[0.5, 2·t_max + 10]`.
    pub bracket: Option<(f64, f64)>,
    pub bisect_tol: f64,
    pub grid: usize,
    pub c_cap: f64,
}

impl Default for PotentialThresholdOptions {
    fn default() -> Self {
        Self {
            bracket: None,
            bisect_tol: 1e-6,
            grid: DEFAULT_GRID,
            c_cap: 1e4,
        }
    }
}

/// `c̄_p = sup{c : min_{x∈[0,1]} V_s(x; c) >= 0}` with default options.
pub fn potential_threshold(profile: &ErasureProfile) -> Result<f64> {
    potential_threshold_with(profile, &PotentialThresholdOptions::default())
}

pub fn potential_threshold_with(
    profile: &ErasureProfile,
    opts: &PotentialThresholdOptions,
) -> Result<f64> {
    if profile.t_bar() < 1.0 {
        return Err(invalid("profile mean must be >= 1"));
    }
    if !(opts.bisect_tol > 0.0) {
        return Err(invalid("bisect_tol must be positive"));
    }
    let feasible = |c: f64| -> Result<bool> {
        Ok(min_vs_with(c, profile, opts.grid, false)?.v_min >= -POTENTIAL_SLACK)
    };
    let (mut lo, mut hi) = opts
        .bracket
        .unwrap_or((0.5, 2.0 * f64::from(profile.t_max()) + 10.0));
    if !(lo > 0.0 && hi > lo) {
        return Err(invalid(format!("bad bracket [{lo}, {hi}]")));
    }
    while !feasible(lo)? {
        lo /= 2.0;
        if lo < 1e-9 {
            return Err(GpcError::NoBracket("potential negative for every tested c".into()));
        }
    }
    while feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > opts.c_cap {
            return Err(GpcError::NoBracket(format!(
                "min V_s >= 0 for every tested c up to {}",
                opts.c_cap
            )));
        }
    }
    while hi - lo > opts.bisect_tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// (Semi-)regular profile with mean `t_bar`: mass on `⌊t̄⌋` and `⌊t̄⌋ + 1`.
pub fn semi_regular(t_bar: f64) -> Result<ErasureProfile> {
    if !(t_bar >= 1.0) || !t_bar.is_finite() {
        return Err(invalid(format!("semi-regular profile needs t_bar >= 1, got {t_bar}")));
    }
    let lo = t_bar.floor();
    let frac = t_bar - lo;
    let lo_t = lo as u32;
    if frac == 0.0 {
        ErasureProfile::regular(lo_t)
    } else {
        ErasureProfile::new([(lo_t, 1.0 - frac), (lo_t + 1, frac)])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reg(t: u32) -> ErasureProfile {
        ErasureProfile::regular(t).unwrap()
    }

    /// Trapezoid quadrature of `h` on `[0, x]`.
    fn quad_h(x: f64, c: f64, p: &ErasureProfile, panels: usize) -> f64 {
        let dx = x / panels as f64;
        let mut s = 0.5 * (h_eval(p, c, 0.0) + h_eval(p, c, x));
        for k in 1..panels {
            s += h_eval(p, c, k as f64 * dx);
        }
        s * dx
    }

    #[test]
    fn vs_endpoints() {
        for (c, p) in [(2.0, reg(2)), (7.5, reg(5)), (4.0, ErasureProfile::new([(2, 0.5), (6, 0.5)]).unwrap())] {
            assert_eq!(potential_vs(0.0, c, &p).unwrap(), 0.0);
            let at_one = -0.5 + (p.t_bar() - loss_mixture(&p, c)) / c;
            assert!((potential_vs(1.0, c, &p).unwrap() - at_one).abs() < 1e-14);
        }
        assert!(potential_vs(0.5, 0.0, &reg(2)).is_err());
    }

    #[test]
    fn vs_matches_quadrature() {
        let p = reg(3);
        let closed = potential_vs(0.7, 5.0, &p).unwrap();
        let numeric = 0.49 / 2.0 - quad_h(0.7, 5.0, &p, 1_000_000);
        assert!((closed - numeric).abs() < 1e-8, "{closed} vs {numeric}");
    }

    #[test]
    fn us_at_zero_and_stationary_points() {
        let p = reg(3);
        let c = 7.0;
        assert_eq!(potential_us(0.0, c, &p).unwrap(), 0.0);
        // iterate x ← h(h(x)) from 1 to its largest fixed point
        let mut x = 1.0;
        for _ in 0..2000 {
            x = h_eval(&p, c, h_eval(&p, c, x));
        }
        assert!(x > 0.5);
        let e = 1e-5;
        let d = (potential_us(x + e, c, &p).unwrap() - potential_us(x - e, c, &p).unwrap()) / (2.0 * e);
        assert!(d.abs() < 1e-8, "U' = {d}");
    }

    #[test]
    fn us_direct_expansion() {
        let p = reg(2);
        let c = 0.8;
        let h1 = h_eval(&p, c, 1.0);
        let hh = |x: f64| x - (2.0 - loss_mixture(&p, c * x)) / c;
        assert!((potential_us(1.0, c, &p).unwrap() - (h1 - hh(1.0) - hh(h1))).abs() < 1e-14);
    }

    #[test]
    fn min_vs_small_and_large_c() {
        let e = min_vs(0.1, &reg(3)).unwrap();
        assert_eq!((e.x_star, e.v_min), (0.0, 0.0));
        let e = min_vs(12.0, &reg(3)).unwrap();
        assert!(e.v_min < 0.0);
        assert!(e.x_star > 0.5);
        let samples = min_vs_with(12.0, &reg(3), 100, true).unwrap().samples.unwrap();
        assert!(samples.iter().all(|&(_, v)| v >= e.v_min - 1e-12));
    }

    #[test]
    fn min_vs_non_increasing_in_c() {
        let p = reg(4);
        let mut prev = f64::INFINITY;
        for k in 0..40 {
            let c = 4.0 + 0.25 * f64::from(k);
            let v = min_vs(c, &p).unwrap().v_min;
            assert!(v <= prev + 1e-15);
            prev = v;
        }
    }

    #[test]
    fn unit_capability_threshold_is_one() {
        // min V_s shrinks like (c - 1)³ above the threshold, so the slack
        // moves the crossing by about its cube root
        let cp = potential_threshold(&reg(1)).unwrap();
        assert!(cp >= 1.0 - 1e-6 && cp - 1.0 < 1e-4, "{cp}");
    }

    #[test]
    fn semi_regular_profiles() {
        assert_eq!(semi_regular(3.0).unwrap(), reg(3));
        let p = semi_regular(3.5).unwrap();
        assert_eq!(p.mass(3), 0.5);
        assert_eq!(p.mass(4), 0.5);
        for tb in [1.0, 1.25, 2.7, 3.999, 9.1] {
            assert_relative_eq!(semi_regular(tb).unwrap().t_bar(), tb, max_relative = 1e-15);
        }
        assert!(semi_regular(0.9).is_err());
    }
}
