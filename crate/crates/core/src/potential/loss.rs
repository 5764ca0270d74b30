//! Truncated Poisson means `𝓛(t, x) = Σ_{k<t} Ψ_{=k}(x)(t - k)` and their
//! profile mixtures.

use crate::density_evolution::poisson::{loss_int, pmf};
use crate::density_evolution::ErasureProfile;
use crate::error::{invalid, Result};

/// `𝓛(t, x)` for real `t >= 1`, affinely interpolated between integers.
pub fn loss_single(t: f64, x: f64) -> Result<f64> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(invalid(format!("loss needs t >= 1, got {t}")));
    }
    if !(x >= 0.0) {
        return Err(invalid(format!("loss needs x >= 0, got {x}")));
    }
    let lo = t.floor();
    let frac = t - lo;
    let l_lo = loss_int(lo as u32, x);
    if frac == 0.0 {
        return Ok(l_lo);
    }
    let l_hi = loss_int(lo as u32 + 1, x);
    Ok(l_lo + (l_hi - l_lo) * frac)
}

/// `𝓛_τ(x) = Σ τ_t 𝓛(t, x)`.
pub fn loss_mixture(profile: &ErasureProfile, x: f64) -> f64 {
    profile.masses().map(|(t, p)| p * loss_int(t, x)).sum()
}

/// `Σ τ_t E[(N - t)^+]` with `N ~ Poisson(u)`, which equals
/// `u - t̄ + 𝓛_τ(u)` but keeps full relative precision for small `u`.
///
/// All capabilities share one table of point masses.
pub(crate) fn excess_mix(profile: &ErasureProfile, u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    let t_max = profile.t_max();
    let tf = f64::from(t_max);
    // table long enough for every tail sum to have converged
    let k_end = (u + 12.0 * u.sqrt().max(1.0) + tf + 40.0).ceil() as u32;
    let mut masses = Vec::with_capacity(k_end as usize + 1);
    let mut term = pmf(0, u);
    if term == 0.0 {
        // e^{-u} underflows; the complement form is exact here
        return u - profile.t_bar() + loss_mixture(profile, u);
    }
    masses.push(term);
    for k in 1..=k_end {
        term *= u / f64::from(k);
        masses.push(term);
    }
    profile
        .masses()
        .map(|(t, p)| {
            let tt = f64::from(t);
            let e = if u > tt + 10.0 * tt.sqrt() {
                let head: f64 = masses[..t as usize]
                    .iter()
                    .enumerate()
                    .map(|(k, m)| m * (tt - k as f64))
                    .sum();
                u - tt + head
            } else {
                masses[t as usize + 1..]
                    .iter()
                    .enumerate()
                    .map(|(j, m)| m * (j + 1) as f64)
                    .sum()
            };
            p * e
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density_evolution::poisson::excess_int;
    use approx::assert_relative_eq;

    #[test]
    fn loss_at_zero_is_t() {
        for t in 1..12 {
            assert_eq!(loss_single(f64::from(t), 0.0).unwrap(), f64::from(t));
        }
    }

    #[test]
    fn loss_unit_is_exponential() {
        for x in [0.0, 0.5, 3.0, 11.0] {
            assert_relative_eq!(loss_single(1.0, x).unwrap(), (-x as f64).exp(), max_relative = 1e-15);
        }
    }

    #[test]
    fn loss_affine_midpoint() {
        for x in [0.0, 0.7, 4.2, 20.0] {
            let mid = loss_single(2.5, x).unwrap();
            let avg = 0.5 * (loss_single(2.0, x).unwrap() + loss_single(3.0, x).unwrap());
            assert!((mid - avg).abs() < 1e-15);
        }
        assert!(loss_single(0.5, 1.0).is_err());
        assert!(loss_single(2.0, -1.0).is_err());
    }

    #[test]
    fn mixture_reductions() {
        let reg = ErasureProfile::regular(4).unwrap();
        assert_eq!(loss_mixture(&reg, 2.3), loss_single(4.0, 2.3).unwrap());
        let mix = ErasureProfile::new([(2, 0.3), (5, 0.7)]).unwrap();
        assert!((loss_mixture(&mix, 0.0) - mix.t_bar()).abs() < 1e-15);
        let semi = ErasureProfile::new([(3, 0.5), (4, 0.5)]).unwrap();
        for x in [0.1, 1.0, 6.0] {
            assert!((loss_mixture(&semi, x) - loss_single(3.5, x).unwrap()).abs() < 1e-15);
        }
    }

    #[test]
    fn shared_table_matches_per_capability() {
        let mix = ErasureProfile::new([(1, 0.1), (3, 0.2), (7, 0.3), (15, 0.4)]).unwrap();
        for i in 0..400 {
            let u = f64::from(i) * 0.11;
            let direct: f64 = mix.masses().map(|(t, p)| p * excess_int(t, u)).sum();
            let shared = excess_mix(&mix, u);
            assert!((shared - direct).abs() <= 1e-13 * direct.max(1.0), "u={u}");
        }
        // relative precision near zero
        let r = ErasureProfile::regular(2).unwrap();
        let u = 1e-5;
        assert_relative_eq!(excess_mix(&r, u), u * u * u / 6.0, max_relative = 1e-4);
    }
}
