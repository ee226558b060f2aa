//! Subcommand bodies. Each one reads and validates everything, builds all
//! output bytes in memory, and only then touches the filesystem.

use std::fs;
use std::path::{Path, PathBuf};

use fxgame::engine::{
    aggregate_rewards, read_prices_csv, read_script_csv, read_trades_csv, replay_simulation, simulate_seeded,
    write_prices_csv, write_trades_csv, PricePipettes, RewardSummary, SimulationConfig, SimulationResult,
};
use fxgame::ingest::{extract_batches, parse_ohlc_csv, rows_to_bars, Batch, CsvFormat};
use fxgame::ohlc::{cumulative_split, read_bars_csv, resample as resample_bars, write_bars_csv, BarsFile, DeviationSplit};
use fxgame::report::{build_comparison, render_candlestick_svg, render_line_svg, render_pie_svg, ChartOptions};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{CliError, EXIT_PARSE};
use crate::{BatchesArgs, ChartLook, CompareArgs, FormatArgs, IngestArgs, LineSeries, ResampleArgs, SimulateArgs};

const RNG_NAME: &str = "xoshiro256** seeded via SplitMix64";

/// Files to write once every input has been validated.
#[derive(Debug, Default)]
struct Outputs {
    files: Vec<(PathBuf, Vec<u8>)>,
}

impl Outputs {
    fn add(&mut self, path: PathBuf, bytes: Vec<u8>) {
        self.files.push((path, bytes));
    }

    /// Adds `<path>.config.json` recording the effective configuration.
    fn add_sidecar(&mut self, path: &Path, config: serde_json::Value) -> Result<(), CliError> {
        let mut name = path.as_os_str().to_owned();
        name.push(".config.json");
        self.add(PathBuf::from(name), json_bytes(&config)?);
        Ok(())
    }

    fn commit(self) -> Result<(), CliError> {
        for (path, bytes) in self.files {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
            }
            fs::write(&path, bytes).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

fn json_bytes<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::new(EXIT_PARSE, e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

fn open(path: &Path) -> Result<fs::File, CliError> {
    fs::File::open(path).map_err(|e| CliError::io(path, e))
}

fn in_file<E: Into<CliError>>(path: &Path) -> impl FnOnce(E) -> CliError + '_ {
    move |e| e.into().in_file(path)
}

fn parse_price(flag: &str, value: &str) -> Result<PricePipettes, CliError> {
    value
        .parse()
        .map_err(|_| CliError::new(EXIT_PARSE, format!("--{flag}: {value:?} is not a price with at most 5 decimals")))
}

fn csv_format(args: &FormatArgs) -> Result<CsvFormat, CliError> {
    let format: CsvFormat = args.format.parse()?;
    Ok(match &args.time_format {
        Some(f) => format.with_time_format(f.clone()),
        None => format,
    })
}

fn display(path: &Path) -> String {
    path.display().to_string()
}

// ---------------------------------------------------------------------------
// simulate

struct RunArtifacts {
    outputs: Outputs,
    summary: RewardSummary,
}

fn run_artifacts(
    dir: PathBuf,
    result: &SimulationResult,
    seed: Option<u64>,
    script: Option<&Path>,
) -> Result<RunArtifacts, CliError> {
    let report = aggregate_rewards(result);
    let summary = RewardSummary::new(seed, result, &report);
    let config = &result.config;

    let mut outputs = Outputs::default();
    let mut trades = Vec::new();
    write_trades_csv(&mut trades, &result.trades)?;
    let mut prices = Vec::new();
    write_prices_csv(&mut prices, &result.price_progression)?;
    outputs.add(dir.join("trades.csv"), trades);
    outputs.add(dir.join("prices.csv"), prices);
    outputs.add(dir.join("rewards.json"), json_bytes(&summary)?);
    outputs.add(
        dir.join("config.json"),
        json_bytes(&json!({
            "command": "simulate",
            "seed": seed,
            "script": script.map(display),
            "n_trades": config.n_trades,
            "initial_price": config.initial_price.to_string(),
            "ppt": config.ppt.to_string(),
            "lot_size": config.lot_size,
            "appetite_decimals": config.appetite_decimals,
            "rng": RNG_NAME,
        }))?,
    );
    Ok(RunArtifacts { outputs, summary })
}

fn print_summary(summary: &RewardSummary) {
    let seed = summary.seed.map_or_else(|| "replay".to_string(), |s| s.to_string());
    println!(
        "seed={seed} n_trades={} intelligent_market_reward={} zero_sum_ok={}",
        summary.n_trades, summary.intelligent_market_reward, summary.zero_sum_ok
    );
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let base = SimulationConfig {
        n_trades: args.trades.unwrap_or(SimulationConfig::default().n_trades),
        initial_price: parse_price("initial-price", &args.initial_price)?,
        ppt: parse_price("ppt", &args.ppt)?,
        lot_size: args.lot_size,
        seed: args.seed.unwrap_or(0),
        appetite_decimals: args.appetite_decimals,
    };
    base.validate()?;

    let runs = if let Some(path) = &args.script {
        let mut script = read_script_csv(open(path)?).map_err(in_file(path))?;
        match args.trades {
            Some(n) if n > script.len() => {
                return Err(CliError::precondition(format!(
                    "--trades {n} exceeds the {} moves in {}",
                    script.len(),
                    path.display()
                )))
            }
            Some(n) => script.truncate(n),
            None => {}
        }
        let result = replay_simulation(&script, base.initial_price, &base)?;
        vec![run_artifacts(args.out_dir.clone(), &result, None, Some(path))?]
    } else {
        let seed = args.seed.expect("clap requires --seed without --script");
        match args.batch {
            None => {
                let result = simulate_seeded(&base)?;
                vec![run_artifacts(args.out_dir.clone(), &result, Some(seed), None)?]
            }
            Some(0) => return Err(CliError::precondition("--batch must be at least 1")),
            Some(k) => {
                let seeds: Vec<u64> = (0..k as u64)
                    .map(|i| seed.checked_add(i).ok_or_else(|| CliError::precondition("seed range overflows u64")))
                    .collect::<Result<_, _>>()?;
                seeds
                    .into_par_iter()
                    .map(|s| {
                        let result = simulate_seeded(&SimulationConfig { seed: s, ..base.clone() })?;
                        run_artifacts(args.out_dir.join(format!("seed-{s}")), &result, Some(s), None)
                    })
                    .collect::<Result<Vec<_>, CliError>>()?
            }
        }
    };

    for run in runs {
        run.outputs.commit()?;
        print_summary(&run.summary);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// resample / ingest / batches

pub fn resample(args: &ResampleArgs) -> Result<(), CliError> {
    let prices = read_prices_csv(open(&args.prices)?).map_err(in_file(&args.prices))?;
    let bars = resample_bars(&prices, args.interval)?;
    let mut csv = Vec::new();
    write_bars_csv(&mut csv, &bars, None)?;

    let mut outputs = Outputs::default();
    outputs.add(args.out.clone(), csv);
    outputs.add_sidecar(
        &args.out,
        json!({
            "command": "resample",
            "prices": display(&args.prices),
            "interval_len": args.interval,
            "input_prices": prices.len(),
            "bars": bars.len(),
        }),
    )?;
    outputs.commit()?;
    println!("{} prices -> {} bars of {}", prices.len(), bars.len(), args.interval);
    Ok(())
}

pub fn ingest(args: &IngestArgs) -> Result<(), CliError> {
    let format = csv_format(&args.format)?;
    let rows = parse_ohlc_csv(open(&args.input)?, &format).map_err(in_file(&args.input))?;
    let file = rows_to_bars(&rows);
    let mut csv = Vec::new();
    write_bars_csv(&mut csv, &file.bars, file.times.as_deref())?;

    let mut outputs = Outputs::default();
    outputs.add(args.out.clone(), csv);
    outputs.add_sidecar(
        &args.out,
        json!({
            "command": "ingest",
            "input": display(&args.input),
            "format": format.name,
            "time_format": format.time_format,
            "rows": rows.len(),
        }),
    )?;
    outputs.commit()?;
    println!("{} rows ingested", rows.len());
    Ok(())
}

pub fn batches(args: &BatchesArgs) -> Result<(), CliError> {
    let format = csv_format(&args.format)?;
    let rows = parse_ohlc_csv(open(&args.bars)?, &format).map_err(in_file(&args.bars))?;
    let batches = extract_batches(&rows, args.len, args.count)?;

    let mut outputs = Outputs::default();
    for batch in &batches {
        let file = batch.to_bars_file();
        let mut csv = Vec::new();
        write_bars_csv(&mut csv, &file.bars, file.times.as_deref())?;
        outputs.add(args.out_dir.join(format!("batch_{:02}.csv", batch.batch_no)), csv);
    }
    outputs.add(
        args.out_dir.join("config.json"),
        json_bytes(&json!({
            "command": "batches",
            "bars": display(&args.bars),
            "format": format.name,
            "time_format": format.time_format,
            "batch_len": args.len,
            "batch_count": args.count,
            "available_rows": rows.len(),
        }))?,
    );
    outputs.commit()?;
    println!("{} batches of {} from {} rows", batches.len(), args.len, rows.len());
    Ok(())
}

// ---------------------------------------------------------------------------
// compare

fn read_bars(path: &Path) -> Result<BarsFile, CliError> {
    read_bars_csv(open(path)?).map_err(in_file(path))
}

pub fn compare(args: &CompareArgs) -> Result<(), CliError> {
    let synthetic = args
        .synthetic
        .iter()
        .map(|p| read_bars(p).map(|f| f.bars))
        .collect::<Result<Vec<_>, _>>()?;
    let real = args
        .real
        .iter()
        .enumerate()
        .map(|(i, p)| read_bars(p).map(|f| Batch::from_bars_file(i + 1, f)))
        .collect::<Result<Vec<_>, _>>()?;
    let report = build_comparison(&synthetic, &real)?;

    let mut outputs = Outputs::default();
    let mut json = report.to_json()?.into_bytes();
    json.push(b'\n');
    outputs.add(args.out.clone(), json);
    if let Some(tables) = &args.tables {
        let mut csv = Vec::new();
        report.write_tables_csv(&mut csv)?;
        outputs.add(tables.clone(), csv);
    }
    outputs.add_sidecar(
        &args.out,
        json!({
            "command": "compare",
            "synthetic": args.synthetic.iter().map(|p| display(p)).collect::<Vec<_>>(),
            "real": args.real.iter().map(|p| display(p)).collect::<Vec<_>>(),
        }),
    )?;
    outputs.commit()?;
    let s = &report.summary;
    println!(
        "synthetic % +ve: min {} max {} mean {:.1} | real % +ve: min {} max {} mean {:.1}",
        s.synthetic.min, s.synthetic.max, s.synthetic.mean, s.real.min, s.real.max, s.real.mean
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// charts

fn chart_options(look: &ChartLook, title: &str, x_label: &str, y_label: &str) -> ChartOptions {
    ChartOptions {
        width: look.width,
        height: look.height,
        ..ChartOptions::titled(look.title.as_deref().unwrap_or(title), x_label, y_label)
    }
}

fn write_svg(out: &Path, svg: String, config: serde_json::Value) -> Result<(), CliError> {
    let mut outputs = Outputs::default();
    outputs.add(out.to_path_buf(), svg.into_bytes());
    outputs.add_sidecar(out, config)?;
    outputs.commit()?;
    println!("wrote {}", out.display());
    Ok(())
}

pub fn chart_line(
    prices: Option<&Path>,
    trades: Option<&Path>,
    series: LineSeries,
    look: &ChartLook,
    out: &Path,
) -> Result<(), CliError> {
    let (values, source) = match (prices, trades) {
        (Some(path), _) => (read_prices_csv(open(path)?).map_err(in_file(path))?, path),
        (None, Some(path)) => {
            let trades = read_trades_csv(open(path)?).map_err(in_file(path))?;
            let values = trades
                .iter()
                .map(|t| match series {
                    LineSeries::Post => t.post_price,
                    LineSeries::Open => t.open_price,
                })
                .collect();
            (values, path)
        }
        (None, None) => return Err(CliError::precondition("one of --prices or --trades is required")),
    };
    let options = chart_options(look, "Price against trade number", "Trade", "Price");
    let svg = render_line_svg(&values, &options)?;
    let series_name = if trades.is_some() && prices.is_none() { format!("{series:?}").to_lowercase() } else { "post".into() };
    write_svg(
        out,
        svg,
        json!({
            "command": "chart line",
            "input": display(source),
            "series": series_name,
            "width": look.width,
            "height": look.height,
        }),
    )
}

pub fn chart_candles(bars: &Path, look: &ChartLook, out: &Path) -> Result<(), CliError> {
    let file = read_bars(bars)?;
    let options = chart_options(look, &format!("Candlestick chart for {} intervals", file.bars.len()), "Interval", "Price");
    let svg = render_candlestick_svg(&file.bars, &options)?;
    write_svg(
        out,
        svg,
        json!({ "command": "chart candles", "bars": display(bars), "width": look.width, "height": look.height }),
    )
}

pub fn chart_pie(split: Option<&Path>, bars: Option<&Path>, look: &ChartLook, out: &Path) -> Result<(), CliError> {
    let (split, source) = match (split, bars) {
        (Some(path), _) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            let given: DeviationSplit = serde_json::from_str(&text)
                .map_err(|e| CliError::new(EXIT_PARSE, format!("{}: {e}", path.display())))?;
            let recomputed = DeviationSplit::from_totals(given.total_pos, given.total_neg).map_err(in_file(path))?;
            if recomputed != given {
                return Err(CliError::precondition(format!(
                    "{}: percentages {}/{} do not match totals ({}, {})",
                    path.display(),
                    given.pct_pos,
                    given.pct_neg,
                    given.total_pos,
                    given.total_neg
                )));
            }
            (given, path)
        }
        (None, Some(path)) => (cumulative_split(&read_bars(path)?.bars).map_err(in_file(path))?, path),
        (None, None) => return Err(CliError::precondition("one of --split or --bars is required")),
    };
    let options = chart_options(look, "Cumulative +veDEV vs -veDEV", "", "");
    let svg = render_pie_svg(&split, &options)?;
    write_svg(
        out,
        svg,
        json!({ "command": "chart pie", "input": display(source), "width": look.width, "height": look.height }),
    )
}
