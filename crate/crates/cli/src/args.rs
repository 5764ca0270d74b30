use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Parser, Debug)]
#[command(name = "gpc", version, about = "Generalized product codes over the BEC: construction, density evolution, thresholds and simulation")]
pub struct Cli {
    /// JSON file supplying defaults for any flag of the command; flags on the
    /// command line take precedence.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory [default: ./out/<command>-<timestamp>]
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build an η matrix and write it with validation diagnostics.
    Construct(ConstructArgs),
    /// Run density evolution at a fixed channel parameter.
    De(DeArgs),
    /// Locate the decoding threshold by bisection.
    Threshold(ThresholdArgs),
    /// Potential threshold, potential curves and the c̄_p table.
    Potential(PotentialArgs),
    /// Sample erasure profiles with a given mean and rank their potential thresholds.
    OptimizeTau(OptimizeTauArgs),
    /// Monte Carlo peeling on finite Tanner graphs against density evolution.
    Simulate(SimulateArgs),
    /// Run named verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub struct FamilyArgs {
    /// pc, staircase, braided, ensemble-emulating, extended-braided, custom,
    /// or ensemble (density evolution only)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
    /// Spatial length
    #[arg(long = "L", visible_alias = "length")]
    #[serde(rename = "L", skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    /// Coupling width
    #[arg(long = "w", visible_alias = "width")]
    #[serde(rename = "w", skip_serializing_if = "Option::is_none")]
    pub width: Option<usize>,
    /// η JSON file for --family custom
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eta: Option<PathBuf>,
    /// Block expansion for ensemble-emulating codes: circulant or anti-circulant
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expansion: Option<String>,
}

#[derive(Args, Debug, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub struct ProfileArgs {
    /// Erasure-correcting capability of every component code
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<u32>,
    /// Capability mixture, e.g. "3:0.5,4:0.5"
    #[arg(long, conflicts_with = "t")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub profile: Option<String>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ConstructArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct DeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Channel parameter (erasure probability c/n)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub zero_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stall_tol: Option<f64>,
    /// Keep the full state every k iterations (0 keeps only the last)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub record_every: Option<usize>,
    /// Iterate the symmetry-reduced system instead of the full matrix
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub reduce: bool,
    /// Also write every recorded state vector
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub states: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ThresholdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Initial bracket "lo,hi"
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bracket: Option<Vec<f64>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c_cap: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// Solve in the symmetry-reduced system
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub reduce: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PotentialArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Evaluate V_s and U_s on [0, 1] at this channel parameter
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    /// Points of the written potential curve
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    /// Grid size of the inner minimization
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bisect_tol: Option<f64>,
    /// Tabulate c̄_p(t) against 2t - 2 for t in "lo,hi"
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_range: Option<Vec<u32>>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct OptimizeTauArgs {
    /// Mean capability t̄ (at least 2)
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_bar: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Largest capability in sampled profiles [default: ceil(t̄) + 4]
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_max: Option<u32>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SimulateArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub family: FamilyArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub profile: ProfileArgs,
    /// Component code length; γn must be an integer
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Base seed; trial k uses seed + k
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_iters: Option<usize>,
    /// Worker threads for the trials
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    /// deterministic or random
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub capability: Option<String>,
    /// flooding or sequential
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schedule: Option<String>,
    /// Write the Tanner graph as an edge list
    #[arg(long)]
    #[serde(skip_serializing_if = "is_false")]
    pub export_graph: bool,
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyArgs {
    /// equivalence, domination, convexity, regular-optimal, theorem1 or all;
    /// repeatable
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub suite: Option<Vec<String>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Monte Carlo trials for theorem1
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    /// Sampled profiles per mean for regular-optimal
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}
