//! JSON and dense-CSV encodings of [`EtaSpec`].
//!
//! JSON layout: `{"family": "...", "gamma": [num, den], "size": n,
//! "ones": [[i, j], ...]}` with 0-based `i <= j`. Only the upper triangle
//! is listed; symmetry is restored on load.

use std::fmt::Write as _;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use super::{EtaSpec, Family};
use crate::error::{GpcError, Result};
use crate::matrix::BinMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EtaJson {
    pub family: Family,
    pub gamma: [i64; 2],
    pub size: usize,
    pub ones: Vec<[usize; 2]>,
}

impl From<&EtaSpec> for EtaJson {
    fn from(spec: &EtaSpec) -> Self {
        let eta = spec.eta();
        let mut ones = Vec::new();
        for i in 0..spec.size() {
            for j in i..spec.size() {
                if eta.get(i, j) != 0 {
                    ones.push([i, j]);
                }
            }
        }
        Self {
            family: spec.family(),
            gamma: [*spec.gamma().numer(), *spec.gamma().denom()],
            size: spec.size(),
            ones,
        }
    }
}

impl TryFrom<EtaJson> for EtaSpec {
    type Error = GpcError;

    fn try_from(j: EtaJson) -> Result<Self> {
        if j.gamma[1] == 0 {
            return Err(GpcError::Parse("gamma denominator is zero".into()));
        }
        let mut eta = BinMatrix::square(j.size);
        for [a, b] in j.ones {
            if a >= j.size || b >= j.size {
                return Err(GpcError::Parse(format!(
                    "index ({a}, {b}) out of range for size {}",
                    j.size
                )));
            }
            eta.set_sym(a, b, 1);
        }
        EtaSpec::new(eta, Rational64::new(j.gamma[0], j.gamma[1]), j.family)
    }
}

impl EtaSpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&EtaJson::from(self)).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let j: EtaJson = serde_json::from_str(text).map_err(|e| GpcError::Parse(e.to_string()))?;
        j.try_into()
    }

    /// Dense 0/1 rows, comma separated. γ and family are not encoded.
    pub fn eta_to_csv(&self) -> String {
        let mut out = String::new();
        for i in 0..self.size() {
            let row: Vec<String> = self.eta().row(i).iter().map(u8::to_string).collect();
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }

    pub fn eta_from_csv(text: &str) -> Result<BinMatrix> {
        let rows = text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| {
                l.split(',')
                    .map(|v| {
                        v.trim()
                            .parse::<u8>()
                            .map_err(|e| GpcError::Parse(format!("`{v}`: {e}")))
                    })
                    .collect::<Result<Vec<u8>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        BinMatrix::from_rows(rows)
    }
}

/// Serde adapter writing rationals as `[num, den]` pairs.
pub(crate) mod ratio_vec {
    use num_rational::Rational64;
    use serde::ser::SerializeSeq;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[Rational64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(v.len()))?;
        for r in v {
            seq.serialize_element(&[*r.numer(), *r.denom()])?;
        }
        seq.end()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::{
        make_braided, make_ensemble_emulating, make_staircase, EnsembleParams,
    };
    use proptest::prelude::*;

    #[test]
    fn staircase_json_layout() {
        let s = make_staircase(6).unwrap();
        let j = EtaJson::from(&s);
        assert_eq!(j.gamma, [1, 2]);
        assert_eq!(j.size, 6);
        assert_eq!(j.ones.len(), 5);
        assert_eq!(j.family, Family::Staircase);
        let v: serde_json::Value = serde_json::from_str(&s.to_json()).unwrap();
        assert_eq!(v["family"], "staircase");
        assert_eq!(v["ones"][0], serde_json::json!([0, 1]));
    }

    #[test]
    fn json_rejects_bad_input() {
        assert!(EtaSpec::from_json(r#"{"family":"pc","gamma":[1,0],"size":2,"ones":[]}"#).is_err());
        assert!(EtaSpec::from_json(r#"{"family":"pc","gamma":[1,1],"size":2,"ones":[[0,2]]}"#).is_err());
        assert!(EtaSpec::from_json(r#"{"family":"nope","gamma":[1,1],"size":2,"ones":[]}"#).is_err());
    }

    #[test]
    fn diagonal_ones_survive() {
        let mut eta = BinMatrix::square(3);
        eta.set(1, 1, 1);
        eta.set_sym(0, 2, 1);
        let spec = EtaSpec::new(eta, Rational64::new(1, 2), Family::Custom).unwrap();
        assert_eq!(EtaSpec::from_json(&spec.to_json()).unwrap(), spec);
    }

    #[test]
    fn csv_round_trip() {
        let s = make_ensemble_emulating(EnsembleParams::new(4, 2).unwrap()).unwrap();
        let back = EtaSpec::eta_from_csv(&s.eta_to_csv()).unwrap();
        assert_eq!(&back, s.eta());
        assert!(EtaSpec::eta_from_csv("0,1\n1,x\n").is_err());
    }

    proptest! {
        #[test]
        fn json_round_trip_is_lossless(l in 2usize..16, sym_bits in proptest::collection::vec(any::<bool>(), 136), num in 1i64..7, den in 1i64..9) {
            let mut eta = BinMatrix::square(l);
            let mut it = sym_bits.iter();
            for i in 0..l {
                for j in i..l {
                    if *it.next().unwrap_or(&false) {
                        eta.set_sym(i, j, 1);
                    }
                }
            }
            let spec = EtaSpec::new(eta, Rational64::new(num, den), Family::Custom).unwrap();
            prop_assert_eq!(EtaSpec::from_json(&spec.to_json()).unwrap(), spec);
        }
    }

    #[test]
    fn builtin_round_trip() {
        let b = make_braided(12).unwrap();
        assert_eq!(EtaSpec::from_json(&b.to_json()).unwrap(), b);
    }
}
