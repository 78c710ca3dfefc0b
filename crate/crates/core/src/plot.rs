//! Minimal standalone SVG rendering for line, scatter and heatmap figures.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use crate::harness::HarnessError;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Series {
            name: name.into(),
            points,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    /// `values[i][j]` belongs to `(xs[i], ys[j])`.
    pub values: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PlotData {
    Line(Vec<Series>),
    /// Duplicate points within a series are drawn once.
    Scatter(Vec<Series>),
    Heatmap(Heatmap),
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlotLabels {
    pub title: String,
    pub x: String,
    pub y: String,
}

impl PlotLabels {
    pub fn new(title: &str, x: &str, y: &str) -> Self {
        PlotLabels {
            title: title.into(),
            x: x.into(),
            y: y.into(),
        }
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn tick_label(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else if v.abs() >= 1e4 || v.abs() < 1e-2 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Linear map from a data range onto a pixel range; degenerate ranges are padded.
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(mut lo: f64, mut hi: f64, px_lo: f64, px_hi: f64) -> Self {
        if !(hi > lo) {
            let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.05 };
            lo -= pad;
            hi += pad;
        }
        Axis { lo, hi, px_lo, px_hi }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
        (lo.min(v), hi.max(v))
    })
}

fn frame(out: &mut String, labels: &PlotLabels, x: &Axis, y: &Axis) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="24" text-anchor="middle" font-family="sans-serif" font-size="16">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(&labels.title)
    );
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<path class="axes" d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" fill="none" stroke="black"/>"#
    );
    for k in 0..=4 {
        let t = k as f64 / 4.0;
        let xv = x.lo + t * (x.hi - x.lo);
        let px = x.map(xv);
        let _ = writeln!(
            out,
            r#"<line x1="{px}" y1="{y0}" x2="{px}" y2="{}" stroke="black"/><text x="{px}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="11">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(xv)
        );
        let yv = y.lo + t * (y.hi - y.lo);
        let py = y.map(yv);
        let _ = writeln!(
            out,
            r#"<line x1="{}" y1="{py}" x2="{x0}" y2="{py}" stroke="black"/><text x="{}" y="{}" text-anchor="end" font-family="sans-serif" font-size="11">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(&labels.x)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" font-family="sans-serif" font-size="13" transform="rotate(-90 18 {})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(&labels.y)
    );
}

fn legend(out: &mut String, names: &[&str]) {
    for (i, name) in names.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 15.0;
        let _ = writeln!(
            out,
            r#"<rect class="legend" x="{x}" y="{}" width="10" height="10" fill="{}"/><text x="{}" y="{}" font-family="sans-serif" font-size="12">{}</text>"#,
            y - 9.0,
            PALETTE[i % PALETTE.len()],
            x + 15.0,
            y,
            escape(name)
        );
    }
}

fn series_axes(series: &[Series]) -> (Axis, Axis) {
    let pts = || series.iter().flat_map(|s| s.points.iter());
    let (xlo, xhi) = extent(pts().map(|p| p.0));
    let (ylo, yhi) = extent(pts().map(|p| p.1));
    (
        Axis::new(xlo, xhi, LEFT, WIDTH - RIGHT),
        Axis::new(ylo, yhi, HEIGHT - BOTTOM, TOP),
    )
}

/// Points of `points` with exact duplicates removed, first occurrence kept.
pub fn distinct_points(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut seen = HashSet::new();
    points
        .iter()
        .copied()
        .filter(|(x, y)| seen.insert((x.to_bits(), y.to_bits())))
        .collect()
}

pub fn render_svg(data: &PlotData, labels: &PlotLabels) -> String {
    let mut out = String::new();
    match data {
        PlotData::Line(series) | PlotData::Scatter(series) => {
            let scatter = matches!(data, PlotData::Scatter(_));
            let (x, y) = series_axes(series);
            frame(&mut out, labels, &x, &y);
            for (i, s) in series.iter().enumerate() {
                let color = PALETTE[i % PALETTE.len()];
                let pts = if scatter {
                    distinct_points(&s.points)
                } else {
                    s.points.clone()
                };
                if !scatter && pts.len() > 1 {
                    let path: Vec<String> = pts
                        .iter()
                        .map(|&(px, py)| format!("{:.2},{:.2}", x.map(px), y.map(py)))
                        .collect();
                    let _ = writeln!(
                        out,
                        r#"<polyline class="series" points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                        path.join(" ")
                    );
                }
                for (px, py) in pts {
                    let _ = writeln!(
                        out,
                        r#"<circle class="pt" cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                        x.map(px),
                        y.map(py)
                    );
                }
            }
            let names: Vec<&str> = series.iter().map(|s| s.name.as_str()).collect();
            legend(&mut out, &names);
        }
        PlotData::Heatmap(h) => {
            let (xlo, xhi) = extent(h.xs.iter().copied());
            let (ylo, yhi) = extent(h.ys.iter().copied());
            let x = Axis::new(xlo, xhi, LEFT, WIDTH - RIGHT);
            let y = Axis::new(ylo, yhi, HEIGHT - BOTTOM, TOP);
            frame(&mut out, labels, &x, &y);
            let (vlo, vhi) = extent(h.values.iter().flatten().copied());
            let cw = (WIDTH - RIGHT - LEFT) / h.xs.len() as f64;
            let ch = (HEIGHT - BOTTOM - TOP) / h.ys.len() as f64;
            for (i, col) in h.values.iter().enumerate() {
                for (j, v) in col.iter().enumerate() {
                    let t = if vhi > vlo { (v - vlo) / (vhi - vlo) } else { 0.5 };
                    let _ = writeln!(
                        out,
                        r#"<rect class="cell" x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                        LEFT + i as f64 * cw,
                        HEIGHT - BOTTOM - (j + 1) as f64 * ch,
                        cw + 0.05,
                        ch + 0.05,
                        ramp(t)
                    );
                }
            }
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11">max {}</text><text x="{}" y="{}" font-family="sans-serif" font-size="11">min {}</text>"#,
                WIDTH - RIGHT + 15.0,
                TOP + 10.0,
                tick_label(vhi),
                WIDTH - RIGHT + 15.0,
                TOP + 28.0,
                tick_label(vlo)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Dark blue to yellow.
fn ramp(t: f64) -> String {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64| (a + (b - a) * t).round() as u8;
    format!("#{:02x}{:02x}{:02x}", lerp(68.0, 253.0), lerp(1.0, 231.0), lerp(84.0, 37.0))
}

pub fn emit_plot(data: &PlotData, labels: &PlotLabels, path: &Path) -> Result<(), HarnessError> {
    let empty = match data {
        PlotData::Line(s) | PlotData::Scatter(s) => s.iter().all(|s| s.points.is_empty()),
        PlotData::Heatmap(h) => h.xs.is_empty() || h.ys.is_empty(),
    };
    if empty {
        return Err(HarnessError::Invalid("nothing to plot".into()));
    }
    std::fs::write(path, render_svg(data, labels)).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn count(svg: &str, needle: &str) -> usize {
        svg.matches(needle).count()
    }

    #[test]
    fn line_has_one_marker_per_point() {
        let pts: Vec<(f64, f64)> = (1..=6).map(|f| (f as f64 * 1e9, f as f64)).collect();
        let svg = render_svg(
            &PlotData::Line(vec![Series::new("u_user", pts)]),
            &PlotLabels::new("sweep", "F (Hz)", "utility"),
        );
        assert_eq!(count(&svg, r#"class="pt""#), 6);
        assert_eq!(count(&svg, r#"class="series""#), 1);
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn scatter_collapses_duplicates() {
        let pts = vec![(1.0, 2.0), (1.0, 2.0), (3.0, 4.0), (1.0, 2.0)];
        let svg = render_svg(
            &PlotData::Scatter(vec![Series::new("disc-pso", pts)]),
            &PlotLabels::default(),
        );
        assert_eq!(count(&svg, r#"class="pt""#), 2);
    }

    #[test]
    fn heatmap_cell_count() {
        let h = Heatmap {
            xs: vec![1.0, 2.0, 3.0],
            ys: vec![1.0, 2.0],
            values: vec![vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]],
        };
        let svg = render_svg(&PlotData::Heatmap(h), &PlotLabels::new("a<b & c", "x", "y"));
        assert_eq!(count(&svg, r#"class="cell""#), 6);
        assert!(svg.contains("a&lt;b &amp; c"));
        roxmltree::Document::parse(&svg).unwrap();
    }

    #[test]
    fn empty_data_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let err = emit_plot(
            &PlotData::Line(vec![Series::new("x", vec![])]),
            &PlotLabels::default(),
            &dir.path().join("x.svg"),
        );
        assert!(matches!(err, Err(HarnessError::Invalid(_))));
    }

    #[test]
    fn single_point_axis_is_padded() {
        let svg = render_svg(
            &PlotData::Line(vec![Series::new("one", vec![(2.0, 5.0)])]),
            &PlotLabels::default(),
        );
        assert!(!svg.contains("NaN"));
        roxmltree::Document::parse(&svg).unwrap();
    }
}
