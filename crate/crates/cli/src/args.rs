use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "odeig",
    version,
    about = "Z-eigenpairs of orthogonally diagonalizable symmetric tensors"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalOpts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalOpts {
    /// Output format for reports.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write output here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Leave the `generated_at_unix` field out of reports.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    Random,
    Identity,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a decomposition file.
    Gen(GenArgs),
    /// Enumerate all real eigenpairs of a decomposition.
    Enumerate { file: PathBuf },
    /// Enumerate and classify every eigenpair.
    Classify { file: PathBuf },
    /// Rediscover eigenpairs with shifted power iteration and match them.
    Verify(VerifyArgs),
    /// Print the class counts for given parameters.
    Count(CountArgs),
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// Tensor order.
    #[arg(long)]
    pub m: usize,
    /// Dimension.
    #[arg(long)]
    pub n: usize,
    /// Number of rank-one terms.
    #[arg(long)]
    pub r: usize,
    #[arg(long, env = "ODEIG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Explicit weights, comma separated.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        conflicts_with = "lambda_range"
    )]
    pub lambdas: Option<Vec<f64>>,
    /// Range `lo,hi` the weights are drawn from.
    #[arg(
        long,
        value_delimiter = ',',
        num_args = 1,
        allow_negative_numbers = true
    )]
    pub lambda_range: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value_t = Basis::Random)]
    pub basis: Basis,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 200)]
    pub restarts: usize,
    #[arg(long, env = "ODEIG_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Match against the pairs of this enumerate/classify report instead
    /// of a fresh enumeration.
    #[arg(long)]
    pub against: Option<PathBuf>,
    /// Where to write the iteration traces on a shortfall.
    #[arg(long)]
    pub trace_dump: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CountArgs {
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub n: usize,
    /// Defaults to `n`.
    #[arg(long)]
    pub r: Option<usize>,
}
