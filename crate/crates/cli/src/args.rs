use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "choi-sqpt", version, about = "Partial process tomography in the Choi matrix representation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Reconstruct a single χ element.
    Element(ElementArgs),
    /// Reconstruct the complete χ matrix.
    Full(FullArgs),
    /// Check trace preservation, complete positivity and the trace law.
    Validate(ValidateArgs),
    /// Print the measurement plan for one element without running it.
    Plan(PlanArgs),
    /// Convert χ between the matrix-unit and Pauli bases (qubit systems).
    Convert(ConvertArgs),
    /// Write a channel in the JSON channel format.
    Export(ExportArgs),
}

#[derive(Debug, Args)]
pub struct ChannelArgs {
    /// Channel JSON file.
    #[arg(long, conflicts_with = "preset")]
    pub channel: Option<PathBuf>,
    /// Built-in channel: identity, bit-flip, phase-flip, depolarizing, amplitude-damping, random-cptp.
    #[arg(long)]
    pub preset: Option<String>,
    /// Preset parameter (repeatable); random-cptp takes a seed and optional Kraus rank.
    #[arg(long = "param", allow_negative_numbers = true)]
    pub params: Vec<f64>,
    /// Dimension for presets.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BackendArg {
    Exact,
    Sampled,
}

#[derive(Debug, Args)]
pub struct BackendArgs {
    #[arg(long, value_enum, default_value_t = BackendArg::Exact)]
    pub backend: BackendArg,
    /// Shots per setting for the sampled backend.
    #[arg(long, default_value_t = 100_000)]
    pub shots: u64,
    /// Master seed for the sampled backend.
    #[arg(long, env = "CHOI_SQPT_SEED", default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Also write the JSON report to this path.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Print a human-readable table instead of JSON.
    #[arg(long)]
    pub pretty: bool,
}

#[derive(Debug, Args)]
pub struct TargetArgs {
    /// Element indices `e,f,g,h` of χ_{ef;gh}.
    #[arg(long)]
    pub target: String,
    /// Read the target as λ indices `a,b,c,d` (χ_{ca;db}).
    #[arg(long)]
    pub lambda: bool,
}

#[derive(Debug, Args)]
pub struct ElementArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    ChoiFour,
    ProductHermitian,
}

#[derive(Debug, Args)]
pub struct FullArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[command(flatten)]
    pub backend: BackendArgs,
    #[arg(long, value_enum, default_value_t = StrategyArg::ChoiFour)]
    pub strategy: StrategyArg,
    /// Local dimension d for product-hermitian (D = d^N); defaults to D itself.
    #[arg(long)]
    pub local_dim: Option<usize>,
    /// Infer the last-level projector outcomes from trace preservation.
    #[arg(long)]
    pub tp_shortcut: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// System dimension D.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[command(flatten)]
    pub target: TargetArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BasisArg {
    Pauli,
    Choi,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// χ JSON file to convert instead of a channel's oracle χ.
    #[arg(long, conflicts_with_all = ["channel", "preset"])]
    pub chi: Option<PathBuf>,
    /// Target basis.
    #[arg(long, value_enum, default_value_t = BasisArg::Pauli)]
    pub to: BasisArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub channel: ChannelArgs,
    /// Destination; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}
