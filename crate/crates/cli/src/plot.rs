//! Minimal deterministic SVG 1.1 plots.

use std::fmt::Write as _;
use std::path::Path;

use crate::output::write_atomic;
use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PlotKind {
    Line,
    Stem,
    /// Histogram of `log10 |v|` over the nonzero entries.
    HistogramLog,
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;
const BINS: usize = 40;

fn fmt(v: f64) -> String {
    // two decimals keep files small and stable
    format!("{v:.2}")
}

/// Maps `[lo, hi]` onto the plot box, tolerating degenerate ranges.
struct Axis {
    lo: f64,
    hi: f64,
    start: f64,
    end: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, start: f64, end: f64) -> Self {
        let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, lo + 0.5) };
        Axis { lo, hi, start, end }
    }

    fn map(&self, v: f64) -> f64 {
        self.start + (v - self.lo) / (self.hi - self.lo) * (self.end - self.start)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

/// Renders `series` as an SVG document.
pub fn render_plot(series: &[f64], kind: PlotKind, title: &str) -> String {
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#,
        w = WIDTH,
        h = HEIGHT
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let escaped = title.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;");
    writeln!(svg, r#"<text x="{}" y="20" font-family="sans-serif" font-size="14">{escaped}</text>"#, fmt(MARGIN)).unwrap();
    let (x0, x1, y0, y1) = (MARGIN, WIDTH - MARGIN, HEIGHT - MARGIN, MARGIN);
    writeln!(
        svg,
        r#"<path d="M{} {} L{} {} M{} {} L{} {}" stroke="black" fill="none"/>"#,
        fmt(x0), fmt(y1), fmt(x0), fmt(y0), fmt(x0), fmt(y0), fmt(x1), fmt(y0)
    )
    .unwrap();

    match kind {
        PlotKind::Line | PlotKind::Stem if !series.is_empty() => {
            let (lo, hi) = range(series.iter().cloned().chain(std::iter::once(0.0)));
            let xs = Axis::new(0.0, (series.len() - 1) as f64, x0, x1);
            let ys = Axis::new(lo, hi, y0, y1);
            let base = ys.map(0.0);
            if kind == PlotKind::Line {
                let pts: Vec<String> = series
                    .iter()
                    .enumerate()
                    .map(|(i, v)| format!("{},{}", fmt(xs.map(i as f64)), fmt(ys.map(*v))))
                    .collect();
                writeln!(svg, r#"<polyline points="{}" stroke="steelblue" fill="none"/>"#, pts.join(" ")).unwrap();
            } else {
                for (i, v) in series.iter().enumerate() {
                    let (x, y) = (fmt(xs.map(i as f64)), fmt(ys.map(*v)));
                    writeln!(svg, r#"<line x1="{x}" y1="{}" x2="{x}" y2="{y}" stroke="steelblue"/>"#, fmt(base)).unwrap();
                    writeln!(svg, r#"<circle cx="{x}" cy="{y}" r="2" fill="steelblue"/>"#).unwrap();
                }
            }
            axis_labels(&mut svg, lo, hi);
        }
        PlotKind::HistogramLog => {
            let logs: Vec<f64> = series.iter().filter(|v| **v != 0.0 && v.is_finite()).map(|v| v.abs().log10()).collect();
            if !logs.is_empty() {
                let (lo, hi) = range(logs.iter().cloned());
                let hi = if hi > lo { hi } else { lo + 1.0 };
                let mut counts = [0usize; BINS];
                for v in &logs {
                    let k = (((v - lo) / (hi - lo)) * BINS as f64) as usize;
                    counts[k.min(BINS - 1)] += 1;
                }
                let top = *counts.iter().max().unwrap() as f64;
                let xs = Axis::new(0.0, BINS as f64, x0, x1);
                let ys = Axis::new(0.0, top, y0, y1);
                for (k, &c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
                    let (xa, xb) = (xs.map(k as f64), xs.map(k as f64 + 1.0));
                    let y = ys.map(c as f64);
                    writeln!(
                        svg,
                        r#"<rect x="{}" y="{}" width="{}" height="{}" fill="steelblue"/>"#,
                        fmt(xa), fmt(y), fmt(xb - xa), fmt(y0 - y)
                    )
                    .unwrap();
                }
                axis_labels(&mut svg, lo, hi);
            }
        }
        _ => {}
    }
    svg.push_str("</svg>\n");
    svg
}

fn axis_labels(svg: &mut String, lo: f64, hi: f64) {
    for (v, y) in [(lo, HEIGHT - MARGIN), (hi, MARGIN)] {
        writeln!(svg, r#"<text x="2" y="{}" font-family="sans-serif" font-size="10">{v:.3e}</text>"#, fmt(y)).unwrap();
    }
}

/// Writes the plot atomically to `path`.
pub fn emit_plot(series: &[f64], kind: PlotKind, path: &Path) -> Result<(), CliError> {
    let title = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    write_atomic(path, render_plot(series, kind, &title).as_bytes())
}
