//! Synthetic-vs-real comparison tables and SVG charts.

mod svg;

use std::io::Write;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::Batch;
use crate::ohlc::{cumulative_split, DeviationSplit, OhlcBar, OhlcError};

pub use svg::{render_candlestick_svg, render_line_svg, render_pie_svg, ChartOptions, LINE_DECIMATION_THRESHOLD};

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{0} cohort is empty")]
    EmptyCohort(&'static str),
    #[error("{cohort} entry {position}: {source}")]
    Split {
        cohort: &'static str,
        position: usize,
        #[source]
        source: OhlcError,
    },
    #[error("line chart needs at least 2 points, got {0}")]
    TooFewPoints(usize),
    #[error("candlestick chart needs at least one bar")]
    NoBars,
    #[error("pie chart needs a non-zero total deviation")]
    ZeroTotal,
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Range of `pct_pos` across one cohort.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortSummary {
    pub min: u8,
    pub max: u8,
    pub mean: f64,
}

impl CohortSummary {
    pub fn from_splits(splits: &[DeviationSplit]) -> Option<Self> {
        let min = splits.iter().map(|s| s.pct_pos).min()?;
        let max = splits.iter().map(|s| s.pct_pos).max()?;
        let mean = splits.iter().map(|s| f64::from(s.pct_pos)).sum::<f64>() / splits.len() as f64;
        Some(CohortSummary { min, max, mean })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub synthetic: CohortSummary,
    pub real: CohortSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub synthetic: Vec<DeviationSplit>,
    pub real: Vec<DeviationSplit>,
    pub summary: ComparisonSummary,
}

impl ComparisonReport {
    pub fn from_splits(synthetic: Vec<DeviationSplit>, real: Vec<DeviationSplit>) -> Result<Self, ReportError> {
        let summary = ComparisonSummary {
            synthetic: CohortSummary::from_splits(&synthetic).ok_or(ReportError::EmptyCohort("synthetic"))?,
            real: CohortSummary::from_splits(&real).ok_or(ReportError::EmptyCohort("real"))?,
        };
        Ok(ComparisonReport { synthetic, real, summary })
    }

    pub fn to_json(&self) -> Result<String, ReportError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self, ReportError> {
        Ok(serde_json::from_str(text)?)
    }

    /// Both cohorts as two column-per-run tables, one after the other.
    pub fn write_tables_csv<W: Write>(&self, out: W) -> Result<(), ReportError> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        write_split_table(&mut w, "Simulation No.", &self.synthetic)?;
        write_split_table(&mut w, "Batch No.", &self.real)?;
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn write_split_table<W: Write>(
    w: &mut csv::Writer<W>,
    label: &str,
    splits: &[DeviationSplit],
) -> Result<(), csv::Error> {
    let row = |head: &str, cells: Vec<String>| std::iter::once(head.to_string()).chain(cells).collect::<Vec<_>>();
    w.write_record(row(label, (1..=splits.len()).map(|i| i.to_string()).collect()))?;
    w.write_record(row("% +ve deviation", splits.iter().map(|s| s.pct_pos.to_string()).collect()))?;
    w.write_record(row("% -ve deviation", splits.iter().map(|s| s.pct_neg.to_string()).collect()))?;
    Ok(())
}

/// Writes one cohort as a stand-alone table (rows: number, % +ve, % -ve).
pub fn write_split_table_csv<W: Write>(out: W, label: &str, splits: &[DeviationSplit]) -> Result<(), ReportError> {
    let mut w = csv::Writer::from_writer(out);
    write_split_table(&mut w, label, splits)?;
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Splits every simulated series and every real batch, then summarizes each cohort.
pub fn build_comparison(synthetic: &[Vec<OhlcBar>], real: &[Batch]) -> Result<ComparisonReport, ReportError> {
    if synthetic.is_empty() {
        return Err(ReportError::EmptyCohort("synthetic"));
    }
    if real.is_empty() {
        return Err(ReportError::EmptyCohort("real"));
    }
    let split = |cohort: &'static str, position: usize, bars: &[OhlcBar]| {
        cumulative_split(bars).map_err(|source| ReportError::Split { cohort, position: position + 1, source })
    };
    let synthetic = synthetic
        .iter()
        .enumerate()
        .map(|(i, bars)| split("synthetic", i, bars))
        .collect::<Result<Vec<_>, _>>()?;
    let real = real
        .iter()
        .enumerate()
        .map(|(i, batch)| split("real", i, &batch.bars))
        .collect::<Result<Vec<_>, _>>()?;
    ComparisonReport::from_splits(synthetic, real)
}
