use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use idscope_core::{Format, LidNormalization, SyntheticKind};

mod commands;
mod report_json;

#[derive(Debug, Parser)]
#[command(name = "idscope", version, about = "Intrinsic dimension of embedding matrices")]
struct Cli {
    /// Worker threads for the neighbour search (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Estimate the intrinsic dimension of one embedding matrix.
    Estimate(EstimateArgs),
    /// Estimate a standard-normal cloud of matching dimension.
    Baseline(BaselineArgs),
    /// Write a synthetic matrix to an npy file.
    Synth(SynthArgs),
    /// Track the estimate across checkpoint files.
    Series(SeriesArgs),
    /// Redundancy table across several models.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
struct EstimatorArgs {
    /// Number of nearest neighbours.
    #[arg(short, long, default_value_t = 5)]
    k: usize,

    /// Distances below this are treated as zero.
    #[arg(long, default_value_t = 1e-12)]
    zero_eps: f64,

    /// Average the log ratios over k-2 instead of k-1.
    #[arg(long)]
    bias_corrected: bool,

    #[arg(long, default_value_t = 42)]
    seed: u64,
}

impl EstimatorArgs {
    fn normalization(&self) -> LidNormalization {
        if self.bias_corrected {
            LidNormalization::KMinusTwo
        } else {
            LidNormalization::KMinusOne
        }
    }
}

#[derive(Debug, Clone, Args)]
struct InputArgs {
    /// word2vec, glove, npy, csv or auto.
    #[arg(long, default_value = "auto")]
    format: Format,

    /// Estimate on a uniform sample of this many rows.
    #[arg(long)]
    sample: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ReportFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DensityKind {
    Kde,
    Histogram,
}

#[derive(Debug, Args)]
struct EstimateArgs {
    input: PathBuf,

    #[command(flatten)]
    input_args: InputArgs,

    #[command(flatten)]
    estimator: EstimatorArgs,

    /// Report file; the report goes to stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    output_format: ReportFormat,

    /// Also write the distribution of local estimates as CSV.
    #[arg(long, requires = "density_out")]
    density: Option<DensityKind>,

    #[arg(long, requires = "density")]
    density_out: Option<PathBuf>,

    #[arg(long, default_value_t = 50)]
    bins: usize,

    #[arg(long, default_value_t = 512)]
    grid_points: usize,

    /// KDE bandwidth; Silverman's rule when omitted.
    #[arg(long)]
    bandwidth: Option<f64>,
}

#[derive(Debug, Args)]
struct BaselineArgs {
    /// Ambient dimension of the Gaussian cloud.
    #[arg(long)]
    dim: usize,

    #[arg(long, default_value_t = 100_000)]
    n: usize,

    #[command(flatten)]
    estimator: EstimatorArgs,

    #[arg(short, long)]
    output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = ReportFormat::Json)]
    output_format: ReportFormat,
}

#[derive(Debug, Args)]
struct SynthArgs {
    #[arg(long, default_value = "gaussian")]
    kind: SyntheticKind,

    #[arg(long)]
    n: usize,

    /// Ambient dimension.
    #[arg(long)]
    dim: usize,

    /// Intrinsic dimension of the hypercube.
    #[arg(long, short = 'm')]
    intrinsic: Option<usize>,

    #[arg(long, default_value_t = 42)]
    seed: u64,

    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Debug, Args)]
struct SeriesArgs {
    /// Glob matching one embedding file per checkpoint.
    #[arg(long)]
    glob: String,

    /// Regex whose first capture group is the step number.
    #[arg(long, default_value = r"step(\d+)")]
    step_pattern: String,

    #[command(flatten)]
    input_args: InputArgs,

    #[command(flatten)]
    estimator: EstimatorArgs,

    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TableFormat {
    Csv,
    Text,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Models to estimate, as NAME=PATH.
    inputs: Vec<String>,

    /// Already-estimated models, as NAME=ED:ID.
    #[arg(long = "known")]
    known: Vec<String>,

    /// Parameter counts, as NAME=COUNT.
    #[arg(long = "params")]
    params: Vec<String>,

    #[command(flatten)]
    input_args: InputArgs,

    #[command(flatten)]
    estimator: EstimatorArgs,

    #[arg(long, value_enum, default_value_t = TableFormat::Csv)]
    output_format: TableFormat,

    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(threads) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    }
    let result = match cli.command {
        Command::Estimate(a) => commands::estimate(a),
        Command::Baseline(a) => commands::baseline(a),
        Command::Synth(a) => commands::synth(a),
        Command::Series(a) => commands::series(a),
        Command::Compare(a) => commands::compare(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
