//! Deterministic SVG 1.1 charts: price line, candlesticks, deviation pie.
//!
//! Output depends only on the inputs and options, so documents can be diffed
//! byte-for-byte. Coordinates are printed with two decimals.

use std::fmt::Write as _;

use super::ReportError;
use crate::engine::PricePipettes;
use crate::ohlc::{DeviationSplit, OhlcBar};

/// Line series longer than this are min/max-decimated per pixel column.
pub const LINE_DECIMATION_THRESHOLD: usize = 10_000;

const UP_FILL: &str = "#2e7d32";
const DOWN_FILL: &str = "#c62828";
const POS_FILL: &str = "#1565c0";
const NEG_FILL: &str = "#ef6c00";
const MIN_VISIBLE: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChartOptions {
    pub width: u32,
    pub height: u32,
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub margin: u32,
}

impl Default for ChartOptions {
    fn default() -> Self {
        ChartOptions {
            width: 960,
            height: 540,
            title: String::new(),
            x_label: String::new(),
            y_label: String::new(),
            margin: 60,
        }
    }
}

impl ChartOptions {
    pub fn titled(title: &str, x_label: &str, y_label: &str) -> Self {
        ChartOptions {
            title: title.to_string(),
            x_label: x_label.to_string(),
            y_label: y_label.to_string(),
            ..Default::default()
        }
    }

    fn plot(&self) -> Plot {
        let m = f64::from(self.margin);
        Plot {
            left: m,
            top: m,
            width: (f64::from(self.width) - 2.0 * m).max(1.0),
            height: (f64::from(self.height) - 2.0 * m).max(1.0),
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Plot {
    left: f64,
    top: f64,
    width: f64,
    height: f64,
}

impl Plot {
    fn bottom(&self) -> f64 {
        self.top + self.height
    }
}

/// Linear map from a pipette range onto the plot's vertical extent.
#[derive(Debug, Clone, Copy)]
struct ValueScale {
    lo: i64,
    hi: i64,
}

impl ValueScale {
    /// A flat range is widened by one pipette each way.
    fn spanning(lo: i64, hi: i64) -> Self {
        if lo == hi {
            ValueScale { lo: lo - 1, hi: hi + 1 }
        } else {
            ValueScale { lo, hi }
        }
    }

    fn y(&self, plot: &Plot, value: i64) -> f64 {
        let t = (value - self.lo) as f64 / (self.hi - self.lo) as f64;
        plot.bottom() - t * plot.height
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

fn open_document(svg: &mut String, options: &ChartOptions, kind: &str) {
    let (w, h) = (options.width, options.height);
    svg.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" class=\"{kind}\">"
    );
    let _ = writeln!(svg, "<rect x=\"0\" y=\"0\" width=\"{w}\" height=\"{h}\" fill=\"#ffffff\"/>");
    if !options.title.is_empty() {
        let _ = writeln!(
            svg,
            "<text class=\"title\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">{}</text>",
            f64::from(w) / 2.0,
            f64::from(options.margin) / 2.0,
            escape(&options.title)
        );
    }
}

fn draw_axes(svg: &mut String, options: &ChartOptions, plot: &Plot, scale: &ValueScale, x_range: (String, String)) {
    let (l, b, r, t) = (plot.left, plot.bottom(), plot.left + plot.width, plot.top);
    let _ = writeln!(svg, "<g class=\"axes\" stroke=\"#000000\" stroke-width=\"1\">");
    let _ = writeln!(svg, "<line class=\"x-axis\" x1=\"{l:.2}\" y1=\"{b:.2}\" x2=\"{r:.2}\" y2=\"{b:.2}\"/>");
    let _ = writeln!(svg, "<line class=\"y-axis\" x1=\"{l:.2}\" y1=\"{t:.2}\" x2=\"{l:.2}\" y2=\"{b:.2}\"/>");
    svg.push_str("</g>\n");
    let _ = writeln!(svg, "<g class=\"ticks\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#000000\">");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
        l - 4.0,
        scale.y(plot, scale.hi) + 4.0,
        PricePipettes(scale.hi)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
        l - 4.0,
        scale.y(plot, scale.lo) + 4.0,
        PricePipettes(scale.lo)
    );
    let _ = writeln!(svg, "<text x=\"{l:.2}\" y=\"{:.2}\" text-anchor=\"start\">{}</text>", b + 14.0, x_range.0);
    let _ = writeln!(svg, "<text x=\"{r:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>", b + 14.0, x_range.1);
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        "<text class=\"x-label\" x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">{}</text>",
        l + plot.width / 2.0,
        b + 36.0,
        escape(&options.x_label)
    );
    let (yx, yy) = (f64::from(options.margin) / 4.0, t + plot.height / 2.0);
    let _ = writeln!(
        svg,
        "<text class=\"y-label\" x=\"{yx:.2}\" y=\"{yy:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 {yx:.2} {yy:.2})\">{}</text>",
        escape(&options.y_label)
    );
}

/// Indices kept by min/max decimation: per bucket, the positions of the
/// minimum and maximum in the order they occur.
fn decimate(series: &[PricePipettes], bucket: usize) -> Vec<usize> {
    let mut keep = Vec::with_capacity(2 * series.len().div_ceil(bucket));
    for (b, chunk) in series.chunks(bucket).enumerate() {
        let base = b * bucket;
        let (mut lo, mut hi) = (0usize, 0usize);
        for (i, p) in chunk.iter().enumerate() {
            if *p < chunk[lo] {
                lo = i;
            }
            if *p > chunk[hi] {
                hi = i;
            }
        }
        let (first, second) = if lo <= hi { (lo, hi) } else { (hi, lo) };
        keep.push(base + first);
        if second != first {
            keep.push(base + second);
        }
    }
    keep
}

/// Price-vs-trade line chart with a single polyline.
pub fn render_line_svg(series: &[PricePipettes], options: &ChartOptions) -> Result<String, ReportError> {
    if series.len() < 2 {
        return Err(ReportError::TooFewPoints(series.len()));
    }
    let plot = options.plot();
    let lo = series.iter().min().expect("non-empty").pipettes();
    let hi = series.iter().max().expect("non-empty").pipettes();
    let scale = ValueScale::spanning(lo, hi);

    let (indices, bucket) = if series.len() > LINE_DECIMATION_THRESHOLD {
        let columns = (plot.width as usize).max(1);
        let bucket = series.len().div_ceil(columns);
        (decimate(series, bucket), bucket)
    } else {
        ((0..series.len()).collect(), 1)
    };

    let last = (series.len() - 1) as f64;
    let mut points = String::with_capacity(indices.len() * 16);
    for (k, &i) in indices.iter().enumerate() {
        if k > 0 {
            points.push(' ');
        }
        let x = plot.left + i as f64 / last * plot.width;
        let _ = write!(points, "{x:.2},{:.2}", scale.y(&plot, series[i].pipettes()));
    }

    let mut svg = String::with_capacity(points.len() + 2048);
    open_document(&mut svg, options, "line-chart");
    let _ = writeln!(
        svg,
        "<metadata>decimation={} bucket={bucket} source_points={} points={}</metadata>",
        if bucket > 1 { "minmax" } else { "none" },
        series.len(),
        indices.len()
    );
    draw_axes(&mut svg, options, &plot, &scale, ("1".to_string(), series.len().to_string()));
    let _ = writeln!(
        svg,
        "<polyline class=\"series\" fill=\"none\" stroke=\"#1565c0\" stroke-width=\"1\" data-points=\"{}\" data-bucket=\"{bucket}\" points=\"{points}\"/>",
        indices.len()
    );
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// One candle per bar: a low-high wick and an open-close body.
pub fn render_candlestick_svg(bars: &[OhlcBar], options: &ChartOptions) -> Result<String, ReportError> {
    if bars.is_empty() {
        return Err(ReportError::NoBars);
    }
    let plot = options.plot();
    let lo = bars.iter().map(|b| b.low).min().expect("non-empty").pipettes();
    let hi = bars.iter().map(|b| b.high).max().expect("non-empty").pipettes();
    let scale = ValueScale::spanning(lo, hi);
    let slot = plot.width / bars.len() as f64;
    let body_width = (slot * 0.6).max(MIN_VISIBLE);

    let mut svg = String::new();
    open_document(&mut svg, options, "candlestick-chart");
    let _ = writeln!(svg, "<metadata>candles={}</metadata>", bars.len());
    let first = bars.first().map(|b| b.index).unwrap_or(1);
    let last = bars.last().map(|b| b.index).unwrap_or(1);
    draw_axes(&mut svg, options, &plot, &scale, (first.to_string(), last.to_string()));

    for (k, bar) in bars.iter().enumerate() {
        let (class, fill) = if bar.is_up() { ("up", UP_FILL) } else { ("down", DOWN_FILL) };
        let cx = plot.left + (k as f64 + 0.5) * slot;
        let mut wick_top = scale.y(&plot, bar.high.pipettes());
        let mut wick_bottom = scale.y(&plot, bar.low.pipettes());
        if wick_bottom - wick_top < MIN_VISIBLE {
            let mid = (wick_top + wick_bottom) / 2.0;
            wick_top = mid - MIN_VISIBLE / 2.0;
            wick_bottom = mid + MIN_VISIBLE / 2.0;
        }
        let y_open = scale.y(&plot, bar.open.pipettes());
        let y_close = scale.y(&plot, bar.close.pipettes());
        let mut body_top = y_open.min(y_close);
        let mut body_height = (y_open - y_close).abs();
        if body_height < MIN_VISIBLE {
            body_top -= (MIN_VISIBLE - body_height) / 2.0;
            body_height = MIN_VISIBLE;
        }
        let _ = writeln!(svg, "<g class=\"candle {class}\" data-interval=\"{}\">", bar.index);
        let _ = writeln!(
            svg,
            "<line class=\"wick\" x1=\"{cx:.2}\" y1=\"{wick_top:.2}\" x2=\"{cx:.2}\" y2=\"{wick_bottom:.2}\" stroke=\"{fill}\" stroke-width=\"1\"/>"
        );
        let _ = writeln!(
            svg,
            "<rect class=\"body\" x=\"{:.2}\" y=\"{body_top:.2}\" width=\"{body_width:.2}\" height=\"{body_height:.2}\" fill=\"{fill}\" stroke=\"{fill}\"/>",
            cx - body_width / 2.0
        );
        svg.push_str("</g>\n");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Sector angles in degrees, proportional to the split's totals.
pub(crate) fn pie_angles(split: &DeviationSplit) -> Option<(f64, f64)> {
    let total = split.total_pos as f64 + split.total_neg as f64;
    if total == 0.0 {
        return None;
    }
    Some((360.0 * split.total_pos as f64 / total, 360.0 * split.total_neg as f64 / total))
}

/// Two-sector pie of cumulative +ve vs -ve deviation.
pub fn render_pie_svg(split: &DeviationSplit, options: &ChartOptions) -> Result<String, ReportError> {
    let (pos_angle, neg_angle) = pie_angles(split).ok_or(ReportError::ZeroTotal)?;
    let plot = options.plot();
    let r = (plot.width.min(plot.height) / 2.0).max(1.0);
    let (cx, cy) = (plot.left + plot.width / 2.0, plot.top + plot.height / 2.0);
    // Angles run clockwise from 12 o'clock.
    let point = |deg: f64| {
        let rad = deg.to_radians();
        (cx + r * rad.sin(), cy - r * rad.cos())
    };

    let mut svg = String::new();
    open_document(&mut svg, options, "pie-chart");
    let _ = writeln!(
        svg,
        "<metadata>total_pos={} total_neg={} pct_pos={} pct_neg={}</metadata>",
        split.total_pos, split.total_neg, split.pct_pos, split.pct_neg
    );

    let sectors = [("pos", POS_FILL, 0.0, pos_angle), ("neg", NEG_FILL, pos_angle, neg_angle)];
    for (class, fill, start, sweep) in sectors {
        if sweep <= 0.0 {
            continue;
        }
        if sweep >= 360.0 {
            let _ = writeln!(
                svg,
                "<circle class=\"sector {class}\" data-angle=\"{sweep}\" cx=\"{cx:.2}\" cy=\"{cy:.2}\" r=\"{r:.2}\" fill=\"{fill}\"/>"
            );
            continue;
        }
        let (x0, y0) = point(start);
        let (x1, y1) = point(start + sweep);
        let large = u8::from(sweep > 180.0);
        let _ = writeln!(
            svg,
            "<path class=\"sector {class}\" data-angle=\"{sweep}\" d=\"M {cx:.2} {cy:.2} L {x0:.2} {y0:.2} A {r:.2} {r:.2} 0 {large} 1 {x1:.2} {y1:.2} Z\" fill=\"{fill}\" stroke=\"#ffffff\"/>"
        );
    }

    let labels = [("pos", "+veDEV", split.pct_pos, POS_FILL), ("neg", "-veDEV", split.pct_neg, NEG_FILL)];
    for (row, (class, name, pct, fill)) in labels.into_iter().enumerate() {
        let y = plot.top + 16.0 + 20.0 * row as f64;
        let x = f64::from(options.width) - f64::from(options.margin) - 110.0;
        let _ = writeln!(
            svg,
            "<g class=\"legend {class}\"><rect x=\"{x:.2}\" y=\"{:.2}\" width=\"12\" height=\"12\" fill=\"{fill}\"/><text class=\"label {class}\" x=\"{:.2}\" y=\"{y:.2}\" font-family=\"sans-serif\" font-size=\"13\">{name} {pct}%</text></g>",
            y - 11.0,
            x + 18.0
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(svg: &str) -> roxmltree::Document<'_> {
        roxmltree::Document::parse(svg).expect("well-formed SVG")
    }

    fn by_class<'a>(d: &'a roxmltree::Document<'a>, class: &str) -> Vec<roxmltree::Node<'a, 'a>> {
        d.descendants()
            .filter(|n| n.attribute("class").is_some_and(|c| c.split(' ').any(|p| p == class)))
            .collect()
    }

    fn polyline_points(svg: &str) -> Vec<(f64, f64)> {
        let d = doc(svg);
        let line = by_class(&d, "series")[0];
        line.attribute("points")
            .unwrap()
            .split(' ')
            .map(|pair| {
                let (x, y) = pair.split_once(',').unwrap();
                (x.parse().unwrap(), y.parse().unwrap())
            })
            .collect()
    }

    fn bar(o: i64, h: i64, l: i64, c: i64) -> OhlcBar {
        OhlcBar::new(1, PricePipettes(o), PricePipettes(h), PricePipettes(l), PricePipettes(c)).unwrap()
    }

    #[test]
    fn root_element_and_size() {
        let svg = render_line_svg(&[PricePipettes(1), PricePipettes(2)], &ChartOptions::default()).unwrap();
        let d = doc(&svg);
        let root = d.root_element();
        assert_eq!(root.tag_name().name(), "svg");
        assert_eq!(root.attribute("width"), Some("960"));
        assert_eq!(root.attribute("height"), Some("540"));
    }

    #[test]
    fn two_points_one_segment() {
        let svg = render_line_svg(&[PricePipettes(10), PricePipettes(20)], &ChartOptions::default()).unwrap();
        let pts = polyline_points(&svg);
        assert_eq!(pts, vec![(60.0, 480.0), (900.0, 60.0)]);
    }

    #[test]
    fn constant_series_is_mid_height() {
        let series = vec![PricePipettes(500); 7];
        let svg = render_line_svg(&series, &ChartOptions::default()).unwrap();
        let pts = polyline_points(&svg);
        assert_eq!(pts.len(), 7);
        assert!(pts.iter().all(|&(_, y)| y == 270.0));
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(render_line_svg(&[PricePipettes(1)], &ChartOptions::default()), Err(ReportError::TooFewPoints(1))));
    }

    #[test]
    fn long_series_is_decimated_keeping_extremes() {
        let series: Vec<_> = (0..25_000i64).map(|i| PricePipettes(((i * 7919) % 1000) - 500)).collect();
        let svg = render_line_svg(&series, &ChartOptions::default()).unwrap();
        let pts = polyline_points(&svg);
        // plot width 840 px -> bucket ceil(25000/840) = 30
        assert!(svg.contains("decimation=minmax bucket=30 source_points=25000"));
        assert!(pts.len() <= 2 * 25_000usize.div_ceil(30));
        let d = doc(&svg);
        assert_eq!(by_class(&d, "series")[0].attribute("data-points").unwrap(), pts.len().to_string());
        let top = pts.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let bottom = pts.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
        assert_eq!((top, bottom), (60.0, 480.0));
    }

    #[test]
    fn short_series_keeps_every_point() {
        let series: Vec<_> = (0..LINE_DECIMATION_THRESHOLD as i64).map(PricePipettes).collect();
        let svg = render_line_svg(&series, &ChartOptions::default()).unwrap();
        assert_eq!(polyline_points(&svg).len(), LINE_DECIMATION_THRESHOLD);
        assert!(svg.contains("decimation=none bucket=1"));
    }

    #[test]
    fn candle_colors_and_count() {
        let bars = [bar(10, 20, 5, 15), bar(15, 18, 8, 9), bar(9, 9, 9, 9)];
        let svg = render_candlestick_svg(&bars, &ChartOptions::default()).unwrap();
        let d = doc(&svg);
        assert_eq!(by_class(&d, "candle").len(), 3);
        assert_eq!(by_class(&d, "up").len(), 2);
        assert_eq!(by_class(&d, "down").len(), 1);
        let down = by_class(&d, "down")[0];
        assert!(down.descendants().any(|n| n.attribute("fill") == Some(DOWN_FILL)));
    }

    #[test]
    fn flat_candle_has_minimum_size() {
        let svg = render_candlestick_svg(&[bar(9, 9, 9, 9)], &ChartOptions::default()).unwrap();
        let d = doc(&svg);
        let body = by_class(&d, "body")[0];
        assert_eq!(body.attribute("height"), Some("1.00"));
        let wick = by_class(&d, "wick")[0];
        let y1: f64 = wick.attribute("y1").unwrap().parse().unwrap();
        let y2: f64 = wick.attribute("y2").unwrap().parse().unwrap();
        assert!((y2 - y1 - 1.0).abs() < 1e-9);
        assert!(matches!(render_candlestick_svg(&[], &ChartOptions::default()), Err(ReportError::NoBars)));
    }

    fn angles(svg: &str) -> Vec<f64> {
        let d = doc(svg);
        by_class(&d, "sector").iter().map(|n| n.attribute("data-angle").unwrap().parse().unwrap()).collect()
    }

    #[test]
    fn pie_sectors() {
        let split = DeviationSplit::from_totals(63, 37).unwrap();
        let svg = render_pie_svg(&split, &ChartOptions::default()).unwrap();
        let a = angles(&svg);
        assert!((a[0] - 226.8).abs() < 1e-9 && (a[1] - 133.2).abs() < 1e-9, "{a:?}");
        assert!((a.iter().sum::<f64>() - 360.0).abs() < 1e-6);
        assert!(svg.contains("+veDEV 63%") && svg.contains("-veDEV 37%"));

        let half = render_pie_svg(&DeviationSplit::from_totals(50, 50).unwrap(), &ChartOptions::default()).unwrap();
        assert_eq!(angles(&half), vec![180.0, 180.0]);

        let full = render_pie_svg(&DeviationSplit::from_totals(7, 0).unwrap(), &ChartOptions::default()).unwrap();
        let d = doc(&full);
        let sectors = by_class(&d, "sector");
        assert_eq!(sectors.len(), 1);
        assert_eq!(sectors[0].tag_name().name(), "circle");
        assert_eq!(angles(&full), vec![360.0]);
    }

    #[test]
    fn pie_rejects_zero_total() {
        let split = DeviationSplit { pct_pos: 50, pct_neg: 50, total_pos: 0, total_neg: 0 };
        assert!(matches!(render_pie_svg(&split, &ChartOptions::default()), Err(ReportError::ZeroTotal)));
    }

    #[test]
    fn text_is_escaped() {
        let options = ChartOptions::titled("A & B <c>", "x", "y");
        let svg = render_line_svg(&[PricePipettes(1), PricePipettes(3)], &options).unwrap();
        let d = doc(&svg);
        assert_eq!(by_class(&d, "title")[0].text(), Some("A & B <c>"));
    }
}
