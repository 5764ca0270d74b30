use num_rational::Rational64;
use num_traits::ToPrimitive;

use crate::construction::{interleave, AveragingMatrix, EtaSpec, Family};
use crate::error::{GpcError, Result};
use crate::matrix::{BinMatrix, RatMatrix};

/// Effective averaging matrix of an interleaved code, obtained by merging
/// positions whose states coincide under the all-ones start.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryReduction {
    pub averaging: AveragingMatrix,
    /// Reduced position `i` stands for full positions `stride*i ..
    /// stride*(i+1)`; `stride*i` is the representative.
    pub stride: usize,
}

impl SymmetryReduction {
    pub fn representative(&self, reduced: usize) -> usize {
        self.stride * reduced
    }
}

/// Reduces braided, ensemble-emulating and extended-braided codes.
///
/// The interleaved layout gives `x_{2i} = x_{2i+1}`, so `B′ = γη′`. For the
/// ensemble-emulating family every `w x w` block of `η′` has constant row
/// sums, which merges a further factor of `w` and yields `B′ = γP = AᵀA`.
/// Structure is verified on the matrix itself, not taken from the tag.
pub fn reduce_symmetric(spec: &EtaSpec) -> Result<SymmetryReduction> {
    let family = spec.family();
    let not = || GpcError::NotReducible(family.to_string());
    if !family.is_interleaved() {
        return Err(not());
    }
    let eta = spec.eta();
    let n = spec.size();
    if n % 2 != 0 {
        return Err(not());
    }
    let m = n / 2;
    let mut eta_prime = BinMatrix::square(m);
    for i in 0..m {
        for j in 0..m {
            eta_prime.set(i, j, eta.get(2 * i + 1, 2 * j));
        }
    }
    if !eta_prime.is_symmetric() || interleave(&eta_prime).map_err(|_| not())? != *eta {
        return Err(not());
    }
    let gamma = spec.gamma();

    if family != Family::EnsembleEmulating {
        return Ok(SymmetryReduction {
            averaging: AveragingMatrix::new(eta_prime.scale(gamma))?,
            stride: 2,
        });
    }

    // γ = 1/w²
    let w = block_width(gamma).ok_or_else(not)?;
    if m % w != 0 {
        return Err(not());
    }
    let blocks = m / w;
    let mut p = RatMatrix::zeros(blocks, blocks);
    for bi in 0..blocks {
        for bj in 0..blocks {
            let k = block_row_sum(&eta_prime, w, bi, bj).ok_or_else(not)?;
            p.set(bi, bj, Rational64::from_integer(k as i64));
        }
    }
    Ok(SymmetryReduction {
        averaging: AveragingMatrix::new(p.scale(gamma))?,
        stride: 2 * w,
    })
}

fn block_width(gamma: Rational64) -> Option<usize> {
    if *gamma.numer() != 1 {
        return None;
    }
    let den = *gamma.denom();
    let w = (den as f64).sqrt().round().to_i64()?;
    (w > 0 && w * w == den).then_some(w as usize)
}

/// Common row (and column) sum of block `(bi, bj)`, if constant.
fn block_row_sum(m: &BinMatrix, w: usize, bi: usize, bj: usize) -> Option<usize> {
    let row = |a: usize| (0..w).filter(|&b| m.get(bi * w + a, bj * w + b) != 0).count();
    let col = |b: usize| (0..w).filter(|&a| m.get(bi * w + a, bj * w + b) != 0).count();
    let k = row(0);
    ((0..w).all(|a| row(a) == k) && (0..w).all(|b| col(b) == k)).then_some(k)
}
