use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::poisson::tail;
use crate::error::{invalid, GpcError, Result};

/// Distribution of component-code erasure-correcting capabilities.
///
/// A profile with a single unit mass is the fixed-`t` setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BTreeMap<u32, f64>", into = "BTreeMap<u32, f64>")]
pub struct ErasureProfile {
    masses: BTreeMap<u32, f64>,
}

const MASS_TOL: f64 = 1e-12;

impl ErasureProfile {
    pub fn new(masses: impl IntoIterator<Item = (u32, f64)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        for (t, p) in masses {
            if t == 0 {
                return Err(invalid("capabilities must be >= 1"));
            }
            if !(p >= 0.0) || !p.is_finite() {
                return Err(invalid(format!("mass for t = {t} must be finite and >= 0, got {p}")));
            }
            if p > 0.0 {
                *map.entry(t).or_insert(0.0) += p;
            }
        }
        let total: f64 = map.values().sum();
        if (total - 1.0).abs() > MASS_TOL {
            return Err(invalid(format!("masses sum to {total}, expected 1")));
        }
        Ok(Self { masses: map })
    }

    pub fn regular(t: u32) -> Result<Self> {
        Self::new([(t, 1.0)])
    }

    pub fn masses(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.masses.iter().map(|(&t, &p)| (t, p))
    }

    pub fn mass(&self, t: u32) -> f64 {
        self.masses.get(&t).copied().unwrap_or(0.0)
    }

    pub fn t_max(&self) -> u32 {
        *self.masses.keys().next_back().expect("profile is nonempty")
    }

    pub fn t_min(&self) -> u32 {
        *self.masses.keys().next().expect("profile is nonempty")
    }

    pub fn t_bar(&self) -> f64 {
        self.masses.iter().map(|(&t, &p)| f64::from(t) * p).sum()
    }

    pub fn is_regular(&self) -> bool {
        self.masses.len() == 1
    }

    /// `Σ τ_t Ψ_{≥t}(u)`; the channel factor is already folded into `u`.
    pub(crate) fn tail_mix(&self, u: f64) -> f64 {
        self.masses.iter().map(|(&t, &p)| p * tail(t, u)).sum::<f64>().clamp(0.0, 1.0)
    }

    /// `Σ τ_t Ψ_{≥t+1}(u)`: probability that a check node sees more erasures
    /// than it can correct.
    pub(crate) fn failure_mix(&self, u: f64) -> f64 {
        self.masses
            .iter()
            .map(|(&t, &p)| p * tail(t + 1, u))
            .sum::<f64>()
            .clamp(0.0, 1.0)
    }
}

impl TryFrom<BTreeMap<u32, f64>> for ErasureProfile {
    type Error = GpcError;

    fn try_from(m: BTreeMap<u32, f64>) -> Result<Self> {
        Self::new(m)
    }
}

impl From<ErasureProfile> for BTreeMap<u32, f64> {
    fn from(p: ErasureProfile) -> Self {
        p.masses
    }
}

impl fmt::Display for ErasureProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.masses().map(|(t, p)| format!("{t}:{p}")).collect();
        f.write_str(&parts.join(","))
    }
}

/// Parses `"3:0.5,4:0.5"`.
impl FromStr for ErasureProfile {
    type Err = GpcError;

    fn from_str(s: &str) -> Result<Self> {
        let pairs = s
            .split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| {
                let (t, m) = p
                    .split_once(':')
                    .ok_or_else(|| GpcError::Parse(format!("expected `t:mass`, got `{p}`")))?;
                let t = t.trim().parse::<u32>().map_err(|e| GpcError::Parse(e.to_string()))?;
                let m = m.trim().parse::<f64>().map_err(|e| GpcError::Parse(e.to_string()))?;
                Ok((t, m))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(pairs)
    }
}

/// `h(x) = Σ τ_t Ψ_{≥t}(cx)`.
pub fn h_eval(profile: &ErasureProfile, c: f64, x: f64) -> f64 {
    profile.tail_mix(c * x)
}
