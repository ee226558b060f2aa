//! `fxgame`: run the trader-vs-market game and its evaluation pipeline.

mod commands;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "fxgame", version, about = "Seeded trader-vs-intelligent-market simulator and OHLC evaluation tools")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the game and write trades.csv, prices.csv, rewards.json and config.json.
    Simulate(SimulateArgs),
    /// Cut a prices CSV into fixed-length OHLC bars.
    Resample(ResampleArgs),
    /// Normalize a historical OHLC export into a bars CSV.
    Ingest(IngestArgs),
    /// Extract consecutive fixed-length batches from a historical OHLC export.
    Batches(BatchesArgs),
    /// Compare deviation splits of simulated bars against real batches.
    Compare(CompareArgs),
    /// Render an SVG chart.
    #[command(subcommand)]
    Chart(ChartCommand),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Number of trades per run [default: 200000, or the script length with --script].
    #[arg(long)]
    pub trades: Option<usize>,
    /// RNG seed; required unless --script is given.
    #[arg(long, required_unless_present = "script")]
    pub seed: Option<u64>,
    /// Replay the trade_type/risk_appetite columns of this CSV instead of drawing.
    #[arg(long, conflicts_with = "batch")]
    pub script: Option<PathBuf>,
    /// Run this many seeds (seed, seed+1, ...) in parallel, one subdirectory each.
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long, default_value = "1.0828")]
    pub initial_price: String,
    /// Price move per unit of risk appetite.
    #[arg(long, default_value = "0.001")]
    pub ppt: String,
    #[arg(long, default_value_t = 100_000)]
    pub lot_size: u64,
    /// Appetite grid precision: 1 or 2 decimals.
    #[arg(long, default_value_t = 2)]
    pub appetite_decimals: u8,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct ResampleArgs {
    /// prices.csv from `simulate`.
    #[arg(long)]
    pub prices: PathBuf,
    /// Prices per bar.
    #[arg(long, default_value_t = 3600)]
    pub interval: usize,
    #[arg(long, default_value = "bars.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FormatArgs {
    /// Column mapping: canonical, titlecase, or custom:TIME,OPEN,HIGH,LOW,CLOSE.
    #[arg(long, default_value = "canonical")]
    pub format: String,
    /// chrono format string for timestamps (default: ISO-8601 shapes).
    #[arg(long)]
    pub time_format: Option<String>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
    #[arg(long, default_value = "real_bars.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BatchesArgs {
    /// Historical OHLC export.
    #[arg(long)]
    pub bars: PathBuf,
    #[command(flatten)]
    pub format: FormatArgs,
    /// Intervals per batch.
    #[arg(long, default_value_t = 55)]
    pub len: usize,
    /// Number of batches.
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value = "batches")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Bars CSV per simulation.
    #[arg(long, num_args = 1.., required = true)]
    pub synthetic: Vec<PathBuf>,
    /// Bars CSV per real batch.
    #[arg(long, num_args = 1.., required = true)]
    pub real: Vec<PathBuf>,
    #[arg(long, default_value = "comparison.json")]
    pub out: PathBuf,
    /// Also write the per-run percentage tables as CSV.
    #[arg(long)]
    pub tables: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LineSeries {
    /// Price after each counter-move.
    Post,
    /// Price at which each trade opened.
    Open,
}

#[derive(Debug, Args)]
pub struct ChartLook {
    #[arg(long, default_value_t = 960)]
    pub width: u32,
    #[arg(long, default_value_t = 540)]
    pub height: u32,
    #[arg(long)]
    pub title: Option<String>,
}

#[derive(Debug, Subcommand)]
enum ChartCommand {
    /// Price line from prices.csv or trades.csv.
    Line {
        #[arg(long, conflicts_with = "trades", required_unless_present = "trades")]
        prices: Option<PathBuf>,
        #[arg(long)]
        trades: Option<PathBuf>,
        /// Which trades.csv column to plot.
        #[arg(long, value_enum, default_value_t = LineSeries::Post)]
        series: LineSeries,
        #[command(flatten)]
        look: ChartLook,
        #[arg(long, default_value = "line.svg")]
        out: PathBuf,
    },
    /// Candlesticks from a bars CSV.
    Candles {
        #[arg(long)]
        bars: PathBuf,
        #[command(flatten)]
        look: ChartLook,
        #[arg(long, default_value = "candles.svg")]
        out: PathBuf,
    },
    /// Deviation pie from a split JSON or a bars CSV.
    Pie {
        /// JSON object with pct_pos, pct_neg, total_pos, total_neg.
        #[arg(long, conflicts_with = "bars", required_unless_present = "bars")]
        split: Option<PathBuf>,
        #[arg(long)]
        bars: Option<PathBuf>,
        #[command(flatten)]
        look: ChartLook,
        #[arg(long, default_value = "pie.svg")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => commands::simulate(&args),
        Command::Resample(args) => commands::resample(&args),
        Command::Ingest(args) => commands::ingest(&args),
        Command::Batches(args) => commands::batches(&args),
        Command::Compare(args) => commands::compare(&args),
        Command::Chart(ChartCommand::Line { prices, trades, series, look, out }) => {
            commands::chart_line(prices.as_deref(), trades.as_deref(), series, &look, &out)
        }
        Command::Chart(ChartCommand::Candles { bars, look, out }) => commands::chart_candles(&bars, &look, &out),
        Command::Chart(ChartCommand::Pie { split, bars, look, out }) => {
            commands::chart_pie(split.as_deref(), bars.as_deref(), &look, &out)
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code)
        }
    }
}
