use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::{EnsembleParams, EtaSpec, Family};
use crate::error::{invalid, GpcError, Result};
use crate::matrix::{BinMatrix, RatMatrix};

fn ratio(n: usize, d: usize) -> Rational64 {
    Rational64::new(n as i64, d as i64)
}

/// Conventional product code: two positions, rows and columns.
pub fn make_pc() -> EtaSpec {
    let mut eta = BinMatrix::square(2);
    eta.set_sym(0, 1, 1);
    EtaSpec::new(eta, ratio(1, 1), Family::Pc).expect("static shape")
}

/// Staircase chain: consecutive positions coupled, `γ = 1/2`.
pub fn make_staircase(length: usize) -> Result<EtaSpec> {
    if length < 2 {
        return Err(invalid(format!("staircase needs L >= 2, got {length}")));
    }
    let mut eta = BinMatrix::square(length);
    for i in 0..length - 1 {
        eta.set_sym(i, i + 1, 1);
    }
    EtaSpec::new(eta, ratio(1, 2), Family::Staircase)
}

/// Block-wise braided chain for even `L >= 4`, `γ = 1/3`.
///
/// Besides the staircase band, every odd position `2k` (0-based) is tied
/// to `2k + 3`.
pub fn make_braided(length: usize) -> Result<EtaSpec> {
    if length < 4 || length % 2 != 0 {
        return Err(invalid(format!(
            "braided needs an even L >= 4, got {length}"
        )));
    }
    let mut eta = BinMatrix::square(length);
    for i in 0..length - 1 {
        eta.set_sym(i, i + 1, 1);
    }
    for k in 0..length / 2 - 1 {
        eta.set_sym(2 * k, 2 * k + 3, 1);
    }
    EtaSpec::new(eta, ratio(1, 3), Family::Braided)
}

/// The `L' x L` band matrix with `A[i][j] = 1/w` for `0 <= j - i < w`.
pub fn ensemble_a(params: EnsembleParams) -> RatMatrix {
    let w = params.coupling_width();
    let mut a = RatMatrix::zeros(params.reduced_length(), params.spatial_length());
    for i in 0..params.reduced_length() {
        for j in i..i + w {
            a.set(i, j, ratio(1, w));
        }
    }
    a
}

/// `B̃ = AᵀA`, the ensemble's effective averaging matrix.
pub fn ensemble_b_tilde(params: EnsembleParams) -> RatMatrix {
    let a = ensemble_a(params);
    a.transpose().matmul(&a).expect("conformable by construction")
}

/// How each multiplicity in `P = w²AᵀA` is expanded into a `w x w` block.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BlockExpansion {
    /// Symmetric circulant with a negation-closed shift set.
    #[default]
    Circulant,
    /// Ones where `(i + j) mod w < k`; a sum of `k` symmetric permutations.
    AntiCirculant,
}

/// Shift set `S` with `S = -S (mod w)` and `|S| = k`.
///
/// Pairs `{s, w - s}` are preferred; `0` and `w/2` fill in odd parity. Such a
/// set exists for every `0 <= k <= w`.
fn circulant_shifts(w: usize, k: usize) -> Vec<usize> {
    let pairs = (w - 1) / 2;
    let has_half = w % 2 == 0;
    let mut shifts = Vec::with_capacity(k);
    let mut need_pairs = k / 2;
    let mut singles = k % 2;
    if need_pairs > pairs {
        // only k = w with w even: both singles are needed
        singles += 2 * (need_pairs - pairs);
        need_pairs = pairs;
    }
    if singles >= 1 {
        shifts.push(0);
    }
    if singles >= 2 {
        debug_assert!(has_half);
        shifts.push(w / 2);
    }
    for s in 1..=need_pairs {
        shifts.push(s);
        shifts.push(w - s);
    }
    shifts
}

/// A `w x w` symmetric binary matrix with exactly `k` ones in each row and column.
pub fn symmetric_block(w: usize, k: usize, expansion: BlockExpansion) -> Result<BinMatrix> {
    if w == 0 {
        return Err(invalid("block size must be positive"));
    }
    if k > w {
        return Err(invalid(format!("cannot place {k} ones per row in a {w}x{w} block")));
    }
    let mut m = BinMatrix::square(w);
    match expansion {
        BlockExpansion::Circulant => {
            let shifts = circulant_shifts(w, k);
            debug_assert_eq!(shifts.len(), k);
            for i in 0..w {
                for &s in &shifts {
                    m.set(i, (i + s) % w, 1);
                }
            }
        }
        BlockExpansion::AntiCirculant => {
            for i in 0..w {
                for j in 0..w {
                    if (i + j) % w < k {
                        m.set(i, j, 1);
                    }
                }
            }
        }
    }
    Ok(m)
}

/// Doubles a symmetric `m x m` matrix into the bipartite `2m x 2m` layout
/// `η[2i+1][2j] = η′[i][j]`, `η[2i][2j+1] = η′[j][i]` (0-based).
pub fn interleave(eta_prime: &BinMatrix) -> Result<BinMatrix> {
    if !eta_prime.is_square() {
        return Err(GpcError::DimensionMismatch {
            expected: eta_prime.rows(),
            actual: eta_prime.cols(),
        });
    }
    if let Some((row, col)) = eta_prime.first_asymmetry() {
        return Err(GpcError::NotSymmetric { row, col });
    }
    let m = eta_prime.rows();
    let mut eta = BinMatrix::square(2 * m);
    for i in 0..m {
        for j in 0..m {
            eta.set(2 * i + 1, 2 * j, eta_prime.get(i, j));
            eta.set(2 * i, 2 * j + 1, eta_prime.get(j, i));
        }
    }
    Ok(eta)
}

/// Braided code that follows the ensemble recursion, with the default
/// circulant block expansion.
pub fn make_ensemble_emulating(params: EnsembleParams) -> Result<EtaSpec> {
    make_ensemble_emulating_with(params, BlockExpansion::default())
}

/// `γ = 1/w²`, `P = w²AᵀA`; each `P[i][j]` becomes a `w x w` symmetric block
/// with that many ones per row, and the resulting `wL x wL` matrix is
/// interleaved to side `2wL`.
pub fn make_ensemble_emulating_with(
    params: EnsembleParams,
    expansion: BlockExpansion,
) -> Result<EtaSpec> {
    let w = params.coupling_width();
    let l = params.spatial_length();
    let w2 = (w * w) as i64;
    let p = ensemble_b_tilde(params).scale(Rational64::from_integer(w2));
    let mut eta_prime = BinMatrix::square(w * l);
    for bi in 0..l {
        for bj in 0..l {
            let mult = p.get(bi, bj);
            debug_assert!(mult.is_integer());
            let k = mult.to_integer().to_usize().expect("nonnegative multiplicity");
            if k == 0 {
                continue;
            }
            let block = symmetric_block(w, k, expansion)?;
            for a in 0..w {
                for b in 0..w {
                    eta_prime.set(bi * w + a, bj * w + b, block.get(a, b));
                }
            }
        }
    }
    EtaSpec::new(interleave(&eta_prime)?, Rational64::new(1, w2), Family::EnsembleEmulating)
}

/// Braided code with coupling width `w`: `η′[i][j] = 1{|i - j| < w}`,
/// `γ = 1/(2w - 1)`, side `2L`.
pub fn make_extended_braided(length: usize, width: usize) -> Result<EtaSpec> {
    if width == 0 || width > length {
        return Err(invalid(format!(
            "extended braided needs 1 <= w <= L, got L = {length}, w = {width}"
        )));
    }
    let mut eta_prime = BinMatrix::square(length);
    for i in 0..length {
        for j in 0..length {
            if i.abs_diff(j) < width {
                eta_prime.set(i, j, 1);
            }
        }
    }
    EtaSpec::new(
        interleave(&eta_prime)?,
        ratio(1, 2 * width - 1),
        Family::ExtendedBraided,
    )
}
