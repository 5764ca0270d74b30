//! Resolved run configurations: defaults, then the `--config` file, then
//! flags given on the command line.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use gpc_core::construction::{
    make_braided, make_ensemble_emulating_with, make_extended_braided, make_pc, make_staircase,
    BlockExpansion,
};
use gpc_core::density_evolution::ensemble_averaging_matrix;
use gpc_core::graph_sim::{CapabilityMode, PeelSchedule};
use gpc_core::{averaging_matrix, EnsembleParams, ErasureProfile, EtaSpec, SparseMatrix};

use crate::error::CliError;

/// Config file keys may use `_` or `-`.
fn normalize(map: Map<String, Value>) -> Map<String, Value> {
    map.into_iter().map(|(k, v)| (k.replace('_', "-"), v)).collect()
}

/// Merges flags over the config file and deserializes the result. Keys that
/// the target does not know are rejected.
pub fn resolve<A: Serialize, C: Serialize + DeserializeOwned>(
    args: &A,
    config: Option<&Path>,
) -> Result<C, CliError> {
    let mut merged = match config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
            match serde_json::from_str(&text) {
                Ok(Value::Object(map)) => normalize(map),
                Ok(_) => return Err(CliError::Usage("config file must hold a JSON object".into())),
                Err(e) => return Err(CliError::Usage(format!("{}: {e}", path.display()))),
            }
        }
        None => Map::new(),
    };
    match serde_json::to_value(args).expect("flags serialize") {
        Value::Object(flags) => merged.extend(flags),
        _ => unreachable!("flag structs are objects"),
    }
    let resolved: C = serde_json::from_value(Value::Object(merged.clone()))
        .map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))?;
    let known = match serde_json::to_value(&resolved).expect("config serializes") {
        Value::Object(m) => m,
        _ => unreachable!(),
    };
    let unknown: Vec<_> = merged.keys().filter(|k| !known.contains_key(*k)).cloned().collect();
    if !unknown.is_empty() {
        return Err(CliError::Usage(format!("unknown config keys: {}", unknown.join(", "))));
    }
    Ok(resolved)
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct FamilyCfg {
    pub family: Option<String>,
    #[serde(rename = "L")]
    pub length: Option<usize>,
    #[serde(rename = "w")]
    pub width: Option<usize>,
    pub eta: Option<PathBuf>,
    pub expansion: Option<String>,
}

/// What the averaging matrix comes from.
pub enum Source {
    Code(EtaSpec),
    Ensemble(EnsembleParams),
}

impl Source {
    pub fn averaging(&self) -> SparseMatrix {
        match self {
            Source::Code(spec) => averaging_matrix(spec).to_sparse(),
            Source::Ensemble(p) => ensemble_averaging_matrix(*p).to_sparse(),
        }
    }

    pub fn spec(self, command: &str) -> Result<EtaSpec, CliError> {
        match self {
            Source::Code(spec) => Ok(spec),
            Source::Ensemble(_) => Err(CliError::Usage(format!(
                "--family ensemble has no η matrix; `{command}` needs a code family (try ensemble-emulating)"
            ))),
        }
    }
}

impl FamilyCfg {
    fn need(&self, v: Option<usize>, flag: &str, family: &str) -> Result<usize, CliError> {
        v.ok_or_else(|| CliError::Usage(format!("--family {family} requires --{flag}")))
    }

    pub fn build(&self) -> Result<Source, CliError> {
        let name = self
            .family
            .as_deref()
            .ok_or_else(|| CliError::Usage("--family is required".into()))?;
        let expansion = match self.expansion.as_deref().map(|s| s.replace('-', "_")) {
            None => BlockExpansion::default(),
            Some(s) if s == "circulant" => BlockExpansion::Circulant,
            Some(s) if s == "anti_circulant" => BlockExpansion::AntiCirculant,
            Some(s) => return Err(CliError::Usage(format!("unknown expansion `{s}`"))),
        };
        let canonical = name.replace('_', "-");
        let spec = match canonical.as_str() {
            "pc" => {
                if self.length.is_some_and(|l| l != 2) {
                    return Err(CliError::Usage("product codes have L = 2".into()));
                }
                make_pc()
            }
            "staircase" => make_staircase(self.need(self.length, "L", name)?)?,
            "braided" => make_braided(self.need(self.length, "L", name)?)?,
            "ensemble-emulating" => {
                let params = EnsembleParams::new(
                    self.need(self.length, "L", name)?,
                    self.need(self.width, "w", name)?,
                )?;
                make_ensemble_emulating_with(params, expansion)?
            }
            "extended-braided" => make_extended_braided(
                self.need(self.length, "L", name)?,
                self.need(self.width, "w", name)?,
            )?,
            "ensemble" => {
                return Ok(Source::Ensemble(EnsembleParams::new(
                    self.need(self.length, "L", name)?,
                    self.need(self.width, "w", name)?,
                )?))
            }
            "custom" => {
                let path = self
                    .eta
                    .as_ref()
                    .ok_or_else(|| CliError::Usage("--family custom requires --eta <file>".into()))?;
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
                EtaSpec::from_json(&text)?
            }
            other => {
                return Err(CliError::Usage(format!(
                    "unknown family `{other}`; expected pc, staircase, braided, ensemble-emulating, extended-braided, custom or ensemble"
                )))
            }
        };
        Ok(Source::Code(spec))
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ProfileCfg {
    pub t: Option<u32>,
    pub profile: Option<String>,
}

impl ProfileCfg {
    pub fn build(&self) -> Result<ErasureProfile, CliError> {
        match (self.t, &self.profile) {
            (Some(t), None) => Ok(ErasureProfile::regular(t)?),
            (None, Some(p)) => Ok(p.parse()?),
            (Some(_), Some(_)) => Err(CliError::Usage("give either --t or --profile, not both".into())),
            (None, None) => Err(CliError::Usage("--t or --profile is required".into())),
        }
    }
}

pub fn required<T>(v: Option<T>, flag: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("--{flag} is required")))
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ConstructCfg {
    #[serde(flatten)]
    pub family: FamilyCfg,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct DeCfg {
    #[serde(flatten)]
    pub family: FamilyCfg,
    #[serde(flatten)]
    pub profile: ProfileCfg,
    pub c: Option<f64>,
    pub max_iters: usize,
    pub zero_tol: f64,
    pub stall_tol: f64,
    pub record_every: usize,
    pub reduce: bool,
    pub states: bool,
}

impl Default for DeCfg {
    fn default() -> Self {
        let de = gpc_core::DeConfig::default();
        Self {
            family: FamilyCfg::default(),
            profile: ProfileCfg::default(),
            c: None,
            max_iters: de.max_iters,
            zero_tol: de.zero_tol,
            stall_tol: de.stall_tol,
            record_every: 1,
            reduce: false,
            states: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct ThresholdCfg {
    #[serde(flatten)]
    pub family: FamilyCfg,
    #[serde(flatten)]
    pub profile: ProfileCfg,
    pub bracket: Option<Vec<f64>>,
    pub bisect_tol: f64,
    pub max_steps: usize,
    pub c_cap: f64,
    pub max_iters: usize,
    pub reduce: bool,
}

impl Default for ThresholdCfg {
    fn default() -> Self {
        let t = gpc_core::density_evolution::ThresholdOptions::default();
        Self {
            family: FamilyCfg::default(),
            profile: ProfileCfg::default(),
            bracket: None,
            bisect_tol: t.bisect_tol,
            max_steps: t.max_steps,
            c_cap: t.c_cap,
            max_iters: t.max_iters,
            reduce: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct PotentialCfg {
    #[serde(flatten)]
    pub profile: ProfileCfg,
    pub c: Option<f64>,
    pub points: usize,
    pub grid: usize,
    pub bisect_tol: f64,
    pub t_range: Option<Vec<u32>>,
}

impl Default for PotentialCfg {
    fn default() -> Self {
        Self {
            profile: ProfileCfg::default(),
            c: None,
            points: 1001,
            grid: gpc_core::potential::DEFAULT_GRID,
            bisect_tol: 1e-6,
            t_range: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct OptimizeTauCfg {
    pub t_bar: Option<f64>,
    pub samples: usize,
    pub seed: u64,
    pub t_max: Option<u32>,
    pub tol: f64,
}

impl Default for OptimizeTauCfg {
    fn default() -> Self {
        Self { t_bar: None, samples: 50, seed: 7, t_max: None, tol: 1e-4 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct SimulateCfg {
    #[serde(flatten)]
    pub family: FamilyCfg,
    #[serde(flatten)]
    pub profile: ProfileCfg,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    pub max_iters: usize,
    pub jobs: Option<usize>,
    pub capability: CapabilityMode,
    pub schedule: PeelSchedule,
    pub export_graph: bool,
}

impl Default for SimulateCfg {
    fn default() -> Self {
        Self {
            family: FamilyCfg::default(),
            profile: ProfileCfg::default(),
            n: None,
            c: None,
            trials: 100,
            seed: 1,
            max_iters: 20,
            jobs: None,
            capability: CapabilityMode::Deterministic,
            schedule: PeelSchedule::Flooding,
            export_graph: false,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case")]
pub struct VerifyCfg {
    pub suite: Vec<String>,
    pub seed: u64,
    pub trials: usize,
    pub samples: usize,
}

impl Default for VerifyCfg {
    fn default() -> Self {
        let v = gpc_core::verify::VerifyOptions::default();
        Self { suite: vec!["all".into()], seed: v.seed, trials: v.trials, samples: v.samples }
    }
}
