//! Poisson point masses, tails and the truncated-mean loss.

use crate::error::{invalid, Result};

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| f64::from(k).ln()).sum()
}

/// `Ψ_{=i}(x) = xⁱ e^{-x} / i!`.
pub fn poisson_pmf(i: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("poisson argument must be finite and >= 0, got {x}")));
    }
    Ok(pmf(i, x))
}

pub(crate) fn pmf(i: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if i == 0 { 1.0 } else { 0.0 };
    }
    (f64::from(i) * x.ln() - x - ln_factorial(i)).exp()
}

/// `Ψ_{≥t}(x) = 1 - Σ_{i<t} Ψ_{=i}(x)`, clamped to `[0, 1]`.
pub fn poisson_tail(t: u32, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(invalid(format!("poisson argument must be finite and >= 0, got {x}")));
    }
    Ok(tail(t, x))
}

/// Unchecked tail for the hot loops.
///
/// Below `t + 10√t` the tail is summed directly upwards from `i = t`, which
/// avoids the cancellation of `1 - (≈1)`. Above it the head `Σ_{i<t}` is tiny
/// and the complement is exact to rounding.
pub(crate) fn tail(t: u32, x: f64) -> f64 {
    if t == 0 {
        return 1.0;
    }
    if x <= 0.0 {
        return 0.0;
    }
    let tf = f64::from(t);
    let v = if x > tf + 10.0 * tf.sqrt() {
        let mut term = (-x).exp();
        let mut head = term;
        for i in 1..t {
            term *= x / f64::from(i);
            head += term;
        }
        1.0 - head
    } else {
        let mut term = pmf(t, x);
        let mut sum = term;
        let mut i = t;
        loop {
            i += 1;
            term *= x / f64::from(i);
            sum += term;
            if f64::from(i) > x && term <= sum * 1e-17 {
                break;
            }
        }
        sum
    };
    v.clamp(0.0, 1.0)
}

/// `Σ_{k<t} Ψ_{=k}(x)(t - k)` for integer `t`, i.e. `E[(t - N)^+]`.
pub(crate) fn loss_int(t: u32, x: f64) -> f64 {
    if x == 0.0 {
        return f64::from(t);
    }
    let mut term = (-x).exp();
    let mut acc = 0.0;
    for k in 0..t {
        if k > 0 {
            term *= x / f64::from(k);
        }
        acc += term * f64::from(t - k);
    }
    acc
}

/// `x - t + loss_int(t, x) = Σ_{k>t}(k - t)Ψ_{=k}(x) = E[(N - t)^+]`,
/// evaluated without cancellation for small `x`.
#[cfg(test)]
pub(crate) fn excess_int(t: u32, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let tf = f64::from(t);
    if x > tf + 10.0 * tf.sqrt() {
        return x - tf + loss_int(t, x);
    }
    let mut term = pmf(t + 1, x);
    let mut sum = term;
    let mut k = t + 1;
    loop {
        k += 1;
        term *= x / f64::from(k);
        let add = term * f64::from(k - t);
        sum += add;
        if f64::from(k) > x && add <= sum * 1e-17 {
            break;
        }
    }
    // first term carries weight (t+1) - t = 1
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn pmf_values() {
        assert_eq!(poisson_pmf(0, 0.0).unwrap(), 1.0);
        assert_eq!(poisson_pmf(3, 0.0).unwrap(), 0.0);
        assert_relative_eq!(poisson_pmf(1, 1.0).unwrap(), 0.3678794412, epsilon = 1e-10);
        let s: f64 = (0..=200).map(|i| pmf(i, 5.0)).sum();
        assert!((s - 1.0).abs() < 1e-12);
        assert!(poisson_pmf(1, -0.5).is_err());
        assert!(poisson_pmf(1, f64::NAN).is_err());
    }

    #[test]
    fn tail_closed_forms() {
        assert_relative_eq!(poisson_tail(1, 1.0).unwrap(), 0.6321205588, epsilon = 1e-10);
        assert_relative_eq!(poisson_tail(2, 1.0).unwrap(), 0.2642411177, epsilon = 1e-10);
        for x in [1e-8, 0.3, 2.0, 17.0, 120.0] {
            assert_relative_eq!(tail(1, x), -(-x as f64).exp_m1(), max_relative = 1e-13);
        }
        for t in 1..6 {
            assert_eq!(tail(t, 0.0), 0.0);
        }
        assert_eq!(tail(0, 3.0), 1.0);
        assert!(poisson_tail(2, -1.0).is_err());
    }

    #[test]
    fn tail_small_argument_keeps_relative_precision() {
        // Ψ≥3(x) ≈ x³/6 for tiny x; the complement form would return 0.
        let x = 1e-6;
        assert_relative_eq!(tail(3, x), x * x * x / 6.0, max_relative = 1e-5);
    }

    #[test]
    fn tail_matches_head_complement_across_switch() {
        for t in 1..25u32 {
            for i in 0..400 {
                let x = f64::from(i) * 0.125;
                let head: f64 = (0..t).map(|k| pmf(k, x)).sum();
                assert!((tail(t, x) - (1.0 - head).clamp(0.0, 1.0)).abs() < 1e-13, "t={t} x={x}");
            }
        }
    }

    #[test]
    fn loss_and_excess_agree() {
        for t in 1..20u32 {
            for i in 0..200 {
                let x = f64::from(i) * 0.3;
                let direct = x - f64::from(t) + loss_int(t, x);
                assert!((excess_int(t, x) - direct).abs() < 1e-12, "t={t} x={x}");
            }
        }
        assert_eq!(loss_int(4, 0.0), 4.0);
        assert_relative_eq!(loss_int(1, 2.5), (-2.5f64).exp(), max_relative = 1e-15);
    }
}
