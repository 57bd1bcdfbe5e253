use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(
    name = "shuffle-sgd",
    version,
    about = "Build lower-bound instances, run shuffling SGD and check convergence bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build a lower-bound instance; writes bundle.json and problem.json.
    Build(BuildArgs),
    /// Run one strategy for K epochs and write the per-epoch record.
    Run(RunArgs),
    /// Final gap of one strategy over a log grid of step sizes.
    Sweep(SweepArgs),
    /// Check a lower or upper bound and write the report.
    Verify(VerifyArgs),
    /// Synthetic figure data.
    Figure {
        #[command(subcommand)]
        figure: FigureCommand,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Instance parameters; L is derived as kappa·mu.
#[derive(Args, Debug, Clone)]
pub struct InstanceArgs {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Number of epochs.
    #[arg(long = "K")]
    pub k: Option<usize>,
    #[arg(long = "G", default_value_t = 1.0)]
    pub g: f64,
    #[arg(long, default_value_t = 1.0)]
    pub mu: f64,
    /// First coordinate of x0 for small-lb-concave.
    #[arg(long = "D", allow_negative_numbers = true)]
    pub d: Option<f64>,
}

/// Where the problem and x0 come from: a construction or a problem JSON file.
#[derive(Args, Debug, Clone)]
pub struct ProblemArgs {
    /// Lower-bound construction to build (e.g. small-lb-sc).
    #[arg(long, conflicts_with = "problem")]
    pub construction: Option<String>,
    /// Problem JSON as written by `build`.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Start point for --problem; zeros when omitted.
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        requires = "problem"
    )]
    pub x0: Option<Vec<f64>>,
    /// Use one dimension block of the construction instead of the aggregate.
    #[arg(long, requires = "construction")]
    pub block: Option<usize>,
    #[command(flatten)]
    pub instance: InstanceArgs,
}

#[derive(Args, Debug, Clone)]
pub struct StrategyArgs {
    /// igd, rr, ss, with-replacement, herding-at-opt or fixed:i,j,...
    #[arg(long, default_value = "igd")]
    pub strategy: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BuildArgs {
    #[arg(long)]
    pub theorem: String,
    #[command(flatten)]
    pub instance: InstanceArgs,
    /// Directory for bundle.json and problem.json.
    #[arg(long, default_value = ".")]
    pub output: PathBuf,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: ProblemArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// A number or auto:<theorem> for that theorem's schedule.
    #[arg(long)]
    pub eta: String,
    /// Record every inner iterate (JSON only).
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub source: ProblemArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Grid bounds; a construction's regime grid is used when omitted.
    #[arg(long, requires = "eta_max")]
    pub eta_min: Option<f64>,
    #[arg(long, requires = "eta_min")]
    pub eta_max: Option<f64>,
    /// Points per regime interval, or in total with --eta-min/--eta-max.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    /// Seeds averaged per grid point for randomized strategies.
    #[arg(long, default_value_t = 1)]
    pub repeats: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, required_unless_present = "all", conflicts_with = "all")]
    pub theorem: Option<String>,
    /// Every theorem at a fixed parameter point.
    #[arg(long)]
    pub all: bool,
    /// Minimum grid density for --all.
    #[arg(long, requires = "all")]
    pub quick: bool,
    #[command(flatten)]
    pub source: ProblemArgs,
    #[command(flatten)]
    pub strategy: StrategyArgs,
    /// Overrides the prescribed schedule of an upper bound.
    #[arg(long)]
    pub eta: Option<f64>,
    /// Grid points per regime interval for lower bounds.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Start {
    Origin,
    Polygon,
}

#[derive(Subcommand, Debug)]
pub enum FigureCommand {
    /// IGD iterates on the rotated two-dimensional block at η = 1/(μnK).
    Trajectory {
        #[arg(long = "K", default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, default_value_t = 1e4)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long = "G", default_value_t = 1.0)]
        g: f64,
        #[arg(long, value_enum, default_value_t = Start::Origin)]
        start: Start,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Mean and quartiles of the final gap per strategy and K.
    GapComparison {
        #[arg(long, default_value_t = 20)]
        seeds: usize,
        /// First seed; seeds run from here upward.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1e4)]
        kappa: f64,
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        #[arg(long = "G", default_value_t = 1.0)]
        g: f64,
        /// Comma-separated K values; log-spaced over [κ/n, κ/4] when omitted.
        #[arg(long = "K-list", value_delimiter = ',')]
        k_list: Option<Vec<usize>>,
        /// Size of the default K grid.
        #[arg(long, default_value_t = 8)]
        k_points: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}
