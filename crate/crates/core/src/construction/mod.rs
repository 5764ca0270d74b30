//! η-matrices, averaging matrices and the code families built from them.
//!
//! Positions are 0-based throughout the crate. All matrices in this module
//! carry exact rational entries; conversion to `f64` happens when an
//! [`AveragingMatrix`] is handed to the recursions.

mod families;
mod io;

pub use families::{
    ensemble_a, ensemble_b_tilde, interleave, make_braided, make_ensemble_emulating,
    make_ensemble_emulating_with, make_extended_braided, make_pc, make_staircase,
    symmetric_block, BlockExpansion,
};
pub use io::EtaJson;

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, GpcError, Result};
use crate::matrix::{BinMatrix, RatMatrix, SparseMatrix};

/// Provenance of an η-matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Pc,
    Staircase,
    Braided,
    EnsembleEmulating,
    ExtendedBraided,
    Custom,
}

impl Family {
    pub fn as_str(self) -> &'static str {
        match self {
            Family::Pc => "pc",
            Family::Staircase => "staircase",
            Family::Braided => "braided",
            Family::EnsembleEmulating => "ensemble_emulating",
            Family::ExtendedBraided => "extended_braided",
            Family::Custom => "custom",
        }
    }

    /// Families whose η is the interleave of a symmetric η′.
    pub fn is_interleaved(self) -> bool {
        matches!(
            self,
            Family::Braided | Family::EnsembleEmulating | Family::ExtendedBraided
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = GpcError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('-', "_").as_str() {
            "pc" => Family::Pc,
            "staircase" => Family::Staircase,
            "braided" => Family::Braided,
            "ensemble_emulating" => Family::EnsembleEmulating,
            "extended_braided" => Family::ExtendedBraided,
            "custom" => Family::Custom,
            other => return Err(GpcError::Parse(format!("unknown family `{other}`"))),
        })
    }
}

/// A binary symmetric connectivity matrix together with its scale γ.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaSpec {
    eta: BinMatrix,
    gamma: Rational64,
    family: Family,
}

impl EtaSpec {
    /// Wraps a square matrix. Symmetry and binarity are *not* enforced here
    /// so that [`validate`] can report on arbitrary input; only the shape
    /// and the sign of γ are checked.
    pub fn new(eta: BinMatrix, gamma: Rational64, family: Family) -> Result<Self> {
        if !eta.is_square() {
            return Err(GpcError::DimensionMismatch {
                expected: eta.rows(),
                actual: eta.cols(),
            });
        }
        if gamma <= Rational64::zero() {
            return Err(invalid(format!("gamma must be positive, got {gamma}")));
        }
        Ok(Self { eta, gamma, family })
    }

    pub fn eta(&self) -> &BinMatrix {
        &self.eta
    }

    pub fn gamma(&self) -> Rational64 {
        self.gamma
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Number of positions `Ltot`.
    pub fn size(&self) -> usize {
        self.eta.rows()
    }
}

/// `B = γη`, or any other square matrix that drives the recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AveragingMatrix {
    b: RatMatrix,
}

impl AveragingMatrix {
    pub fn new(b: RatMatrix) -> Result<Self> {
        if b.rows() != b.cols() {
            return Err(GpcError::DimensionMismatch {
                expected: b.rows(),
                actual: b.cols(),
            });
        }
        if b.entries().any(|v| v < Rational64::zero()) {
            return Err(invalid("averaging matrix entries must be nonnegative"));
        }
        Ok(Self { b })
    }

    pub fn matrix(&self) -> &RatMatrix {
        &self.b
    }

    pub fn size(&self) -> usize {
        self.b.rows()
    }

    pub fn row_sums(&self) -> Vec<Rational64> {
        (0..self.size()).map(|i| self.b.row_sum(i)).collect()
    }

    pub fn to_sparse(&self) -> SparseMatrix {
        self.b.to_sparse()
    }
}

/// `B = γη`.
pub fn averaging_matrix(spec: &EtaSpec) -> AveragingMatrix {
    AveragingMatrix {
        b: spec.eta.scale(spec.gamma),
    }
}

/// Spatial length `L` and coupling width `w` of the coupled ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EnsembleParams {
    spatial_length: usize,
    coupling_width: usize,
}

impl EnsembleParams {
    pub fn new(spatial_length: usize, coupling_width: usize) -> Result<Self> {
        if coupling_width == 0 {
            return Err(invalid("coupling width must be positive"));
        }
        if coupling_width > spatial_length {
            return Err(invalid(format!(
                "coupling width {coupling_width} exceeds spatial length {spatial_length}"
            )));
        }
        Ok(Self {
            spatial_length,
            coupling_width,
        })
    }

    pub fn spatial_length(&self) -> usize {
        self.spatial_length
    }

    pub fn coupling_width(&self) -> usize {
        self.coupling_width
    }

    /// `L' = L - w + 1`, the number of VN positions in the ensemble.
    pub fn reduced_length(&self) -> usize {
        self.spatial_length - self.coupling_width + 1
    }
}

/// Result of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub size: usize,
    pub symmetric: bool,
    /// Upper-triangle positions `(i, j)` with `η[i][j] != η[j][i]`.
    pub symmetry_violations: Vec<(usize, usize)>,
    /// Entries that are neither 0 nor 1.
    pub non_binary: Vec<(usize, usize, u8)>,
    #[serde(with = "io::ratio_vec")]
    pub row_sums: Vec<Rational64>,
    /// Half-open range of positions at least one coupling radius away from
    /// both chain ends.
    pub interior: (usize, usize),
    /// `None` when the chain is too short to have interior positions.
    pub interior_rows_sum_to_one: Option<bool>,
}

impl Diagnostics {
    pub fn passed(&self) -> bool {
        self.symmetric && self.non_binary.is_empty() && self.interior_rows_sum_to_one != Some(false)
    }
}

/// Reports symmetry, binarity and the row-sum profile of `B = γη`.
pub fn validate(spec: &EtaSpec) -> Diagnostics {
    let eta = spec.eta();
    let n = spec.size();
    let mut symmetry_violations = Vec::new();
    let mut non_binary = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let v = eta.get(i, j);
            if v > 1 {
                non_binary.push((i, j, v));
            }
            if j > i && v != eta.get(j, i) {
                symmetry_violations.push((i, j));
            }
        }
    }
    let row_sums = averaging_matrix(spec).row_sums();
    let radius = eta.coupling_radius();
    let interior = if n > 2 * radius {
        (radius, n - radius)
    } else {
        (0, 0)
    };
    let interior_rows_sum_to_one = (interior.0 < interior.1).then(|| {
        row_sums[interior.0..interior.1]
            .iter()
            .all(|s| s.is_one())
    });
    Diagnostics {
        size: n,
        symmetric: symmetry_violations.is_empty(),
        symmetry_violations,
        non_binary,
        row_sums,
        interior,
        interior_rows_sum_to_one,
    }
}
