use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const SUBCOMMANDS: &[&str] = &[
    "hamiltonian",
    "bounds",
    "empirical",
    "trotter-search",
    "figure1",
    "figure2",
    "error-vs-t",
    "otoc",
    "haar-d",
    "sd-scaling",
];

#[derive(Parser, Debug)]
#[command(name = "trotterr", version, about = "Average-case Trotter error experiments")]
pub struct Cli {
    /// Key-value file (`key = value` per line) supplying defaults; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a model instance and print its term groups.
    #[command(args_override_self = true)]
    Hamiltonian(HamiltonianArgs),
    /// Evaluate analytic error bounds.
    #[command(args_override_self = true)]
    Bounds(BoundsArgs),
    /// Sample the average-case error at fixed Trotter numbers.
    #[command(args_override_self = true)]
    Empirical(EmpiricalArgs),
    /// Minimal Trotter number per criterion, averaged over instances.
    #[command(args_override_self = true)]
    TrotterSearch(SearchArgs),
    /// Nearest-neighbor Heisenberg sweep for PF1 and PF2.
    #[command(args_override_self = true)]
    Figure1(FigureArgs),
    /// Power-law sweep for PF1 and PF2 at several exponents.
    #[command(args_override_self = true)]
    Figure2(Figure2Args),
    /// Empirical error as a function of evolution time at fixed r.
    #[command(args_override_self = true)]
    ErrorVsT(ErrorVsTArgs),
    /// Out-of-time-ordered correlator, exact against Trotterized.
    #[command(args_override_self = true)]
    Otoc(OtocArgs),
    /// Haar-integral D statistic for synthetic spectra.
    #[command(args_override_self = true)]
    HaarD(HaarArgs),
    /// Spread of the error at the minimal Trotter number.
    #[command(args_override_self = true)]
    SdScaling(SdArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Hamiltonian(_) => "hamiltonian",
            Command::Bounds(_) => "bounds",
            Command::Empirical(_) => "empirical",
            Command::TrotterSearch(_) => "trotter-search",
            Command::Figure1(_) => "figure1",
            Command::Figure2(_) => "figure2",
            Command::ErrorVsT(_) => "error-vs-t",
            Command::Otoc(_) => "otoc",
            Command::HaarD(_) => "haar-d",
            Command::SdScaling(_) => "sd-scaling",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Hamiltonian(a) => &a.common,
            Command::Bounds(a) => &a.common,
            Command::Empirical(a) => &a.common,
            Command::TrotterSearch(a) => &a.common,
            Command::Figure1(a) => &a.common,
            Command::Figure2(a) => &a.common,
            Command::ErrorVsT(a) => &a.common,
            Command::Otoc(a) => &a.common,
            Command::HaarD(a) => &a.common,
            Command::SdScaling(a) => &a.common,
        }
    }

    pub fn echo(&self) -> serde_json::Result<serde_json::Value> {
        match self {
            Command::Hamiltonian(a) => serde_json::to_value(a),
            Command::Bounds(a) => serde_json::to_value(a),
            Command::Empirical(a) => serde_json::to_value(a),
            Command::TrotterSearch(a) => serde_json::to_value(a),
            Command::Figure1(a) => serde_json::to_value(a),
            Command::Figure2(a) => serde_json::to_value(a),
            Command::ErrorVsT(a) => serde_json::to_value(a),
            Command::Otoc(a) => serde_json::to_value(a),
            Command::HaarD(a) => serde_json::to_value(a),
            Command::SdScaling(a) => serde_json::to_value(a),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Common {
    /// Output file; standard output when absent.
    #[arg(long, value_name = "PATH")]
    #[serde(skip)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    /// Run even when the memory estimate exceeds the cap.
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ModelArgs {
    /// heisenberg1d, power-law or k-local.
    #[arg(long, default_value = "heisenberg1d")]
    pub model: String,
    /// Power-law exponent.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Locality of k-local terms.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub terms_per_support: Option<usize>,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HamiltonianArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Instance index; the Hamiltonian seed is derived from (seed, n, instance).
    #[arg(long, default_value_t = 0)]
    pub instance: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstantArg {
    Omitted,
    Proof,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum HNormArg {
    FourN,
    Computed,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct BoundsArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    /// Sizes: `4`, `4,6,8`, `4..12` or `4..12:2`.
    #[arg(long, default_value = "4")]
    pub n: String,
    #[arg(long, default_value = "1")]
    pub p: String,
    /// Times; the token `n` stands for the current system size.
    #[arg(long, default_value = "1")]
    pub t: String,
    #[arg(long, default_value = "1")]
    pub r: String,
    /// Comma list of triangle, tp, alpha_comm, counting, interference, or `all`.
    #[arg(long, default_value = "all")]
    pub bounds: String,
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[arg(long, value_enum, default_value_t = ConstantArg::Omitted)]
    pub constant: ConstantArg,
    /// Norm of H inside the interference prefactor.
    #[arg(long, value_enum, default_value_t = HNormArg::FourN)]
    pub h_norm: HNormArg,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct EmpiricalArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "4")]
    pub n: String,
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "1")]
    pub t: String,
    #[arg(long, default_value = "1")]
    pub r: String,
    #[arg(long, default_value = "haar")]
    pub ensemble: String,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SweepArgs {
    #[arg(long, default_value_t = 1e-3)]
    pub eps: f64,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value = "haar")]
    pub ensemble: String,
    #[arg(long, default_value_t = 1_000_000_000)]
    pub r_cap: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SearchArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "4..8")]
    pub n: String,
    #[arg(long, default_value = "n")]
    pub t: String,
    /// Comma list of empirical, worst, triangle, counting, interference, tp, alpha_comm.
    #[arg(long, default_value = "empirical,triangle")]
    pub criteria: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct FigureArgs {
    #[arg(long, default_value = "4..12")]
    pub n: String,
    #[arg(long, default_value = "1,2")]
    pub p: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct Figure2Args {
    #[arg(long, default_value = "4..10")]
    pub n: String,
    #[arg(long, default_value = "1,2")]
    pub p: String,
    #[arg(long, default_value = "0,4")]
    pub alpha: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct ErrorVsTArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 6)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub p: usize,
    #[arg(long, default_value_t = 10_000)]
    pub r: u64,
    #[arg(long, default_value = "1,2,5,10,20,50,100,200,300,500,700,1000")]
    pub t: String,
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 5)]
    pub instances: usize,
    #[arg(long, default_value = "haar")]
    pub ensemble: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct OtocArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "4")]
    pub n: String,
    #[arg(long, default_value = "1")]
    pub t: String,
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "1,2,4,8,16,32")]
    pub r: String,
    #[arg(long, default_value_t = 1)]
    pub instances: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct HaarArgs {
    /// Comma list of one_nonzero, equally_spaced, degenerate, exponential_random, or `all`.
    #[arg(long, default_value = "all")]
    pub scenario: String,
    #[arg(long, default_value = "2,4,8,16,32,64")]
    pub d: String,
    /// Random spectra per dimension; the row keeps the maximum.
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 20_000)]
    pub mc_samples: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}

#[derive(Args, Debug, Clone, Serialize)]
pub struct SdArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value = "1")]
    pub p: String,
    #[arg(long, default_value = "4..10")]
    pub n: String,
    #[arg(long, default_value = "n")]
    pub t: String,
    #[command(flatten)]
    #[serde(flatten)]
    pub sweep: SweepArgs,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: Common,
}
