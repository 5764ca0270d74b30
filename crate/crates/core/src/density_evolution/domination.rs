//! Comparison of the doubled braided recursion `z⁽ℓ⁾ = B′h(B′h(z⁽ℓ⁻¹⁾))`
//! against the two-sided averaging recursion `y⁽ℓ⁾ = Aᵀh(Ah(y⁽ℓ⁻¹⁾))`,
//! where `A` is `L x (L + w̃ - 1)` with band width `w̃ = 2w - 1` and
//! `B′ = η′/(2w - 1)`, `η′[i][j] = 1{|i - j| < w}`.

use num_rational::Rational64;
use serde::Serialize;

use super::profile::ErasureProfile;
use crate::error::{invalid, Result};
use crate::matrix::{BinMatrix, RatMatrix, SparseMatrix};

/// Slack allowed in `y_center ⪰ z`.
pub const DOMINATION_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation {
    pub iter: usize,
    pub position: usize,
    pub y_center: f64,
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DominationReport {
    pub length: usize,
    pub width: usize,
    pub c: f64,
    pub iterations: usize,
    /// `min_ℓ min_i (y_center - z)`.
    pub min_margin: f64,
    pub first_violation: Option<Violation>,
    pub final_y_center_max: f64,
    pub final_z_max: f64,
}

impl DominationReport {
    pub fn holds(&self) -> bool {
        self.first_violation.is_none()
    }
}

fn two_sided_a(length: usize, width: usize) -> SparseMatrix {
    let band = 2 * width - 1;
    let mut a = RatMatrix::zeros(length, length + band - 1);
    for i in 0..length {
        for j in i..i + band {
            a.set(i, j, Rational64::new(1, band as i64));
        }
    }
    a.to_sparse()
}

fn braided_b_prime(length: usize, width: usize) -> SparseMatrix {
    let mut eta = BinMatrix::square(length);
    for i in 0..length {
        for j in 0..length {
            if i.abs_diff(j) < width {
                eta.set(i, j, 1);
            }
        }
    }
    eta.scale(Rational64::new(1, 2 * width as i64 - 1)).to_sparse()
}

pub fn check_domination(
    length: usize,
    width: usize,
    profile: &ErasureProfile,
    c: f64,
    iters: usize,
) -> Result<DominationReport> {
    if width == 0 || width > length {
        return Err(invalid(format!("need 1 <= w <= L, got L = {length}, w = {width}")));
    }
    if !(c >= 0.0) {
        return Err(invalid("c must be >= 0"));
    }
    let a = two_sided_a(length, width);
    let at = a.transpose();
    let bp = braided_b_prime(length, width);
    let h = |v: &[f64]| -> Vec<f64> { v.iter().map(|&x| profile.tail_mix(c * x)).collect() };

    let offset = width - 1;
    let mut y = vec![1.0; length + 2 * width - 2];
    let mut z = vec![1.0; length];
    let mut min_margin = 0.0f64;
    let mut first_violation = None;

    for iter in 1..=iters {
        y = at.mul_vec(&h(&a.mul_vec(&h(&y))));
        z = bp.mul_vec(&h(&bp.mul_vec(&h(&z))));
        for (i, &zi) in z.iter().enumerate() {
            let yc = y[offset + i];
            let margin = yc - zi;
            min_margin = min_margin.min(margin);
            if first_violation.is_none() && yc < zi - DOMINATION_SLACK {
                first_violation = Some(Violation {
                    iter,
                    position: i,
                    y_center: yc,
                    z: zi,
                });
            }
        }
    }

    Ok(DominationReport {
        length,
        width,
        c,
        iterations: iters,
        min_margin,
        first_violation,
        final_y_center_max: y[offset..offset + length].iter().copied().fold(0.0, f64::max),
        final_z_max: z.iter().copied().fold(0.0, f64::max),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t4() -> ErasureProfile {
        ErasureProfile::regular(4).unwrap()
    }

    #[test]
    fn holds_for_moderate_chain() {
        let r = check_domination(20, 3, &t4(), 5.0, 200).unwrap();
        assert!(r.holds(), "{:?}", r.first_violation);
    }

    #[test]
    fn zero_channel_collapses_both() {
        let r = check_domination(10, 2, &t4(), 0.0, 1).unwrap();
        assert!(r.holds());
        assert_eq!(r.final_y_center_max, 0.0);
        assert_eq!(r.final_z_max, 0.0);
    }

    #[test]
    fn zero_iterations_is_trivial() {
        let r = check_domination(10, 2, &t4(), 6.0, 0).unwrap();
        assert!(r.holds());
        assert_eq!(r.min_margin, 0.0);
        assert_eq!(r.final_z_max, 1.0);
    }

    #[test]
    fn center_rows_of_at_match_b_prime() {
        let (l, w) = (9, 3);
        let at = two_sided_a(l, w).transpose();
        let bp = braided_b_prime(l, w);
        for i in 0..l {
            let mut lhs: Vec<(usize, f64)> = at.row(w - 1 + i).to_vec();
            lhs.sort_by_key(|e| e.0);
            assert_eq!(lhs, bp.row(i).to_vec());
        }
    }
}
