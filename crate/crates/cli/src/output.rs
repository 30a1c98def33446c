//! Result tables and their CSV, JSON and SVG renderings.

use std::path::{Path, PathBuf};

use plotters::prelude::*;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Cell {
    Real(f64),
    Int(i64),
    Bool(bool),
    Text(String),
    Missing,
}

impl Cell {
    /// Shortest round-trip decimal; identical inputs give identical bytes.
    fn render(&self) -> String {
        match self {
            Cell::Real(x) => format!("{x:?}"),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Missing => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Real(x)
    }
}
impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}
impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}
impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}
impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}
impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Missing, Into::into)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl ResultTable {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    /// # Panics
    /// When the row length differs from the column count.
    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row length must match the columns");
        self.rows.push(row);
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?;
        w.write_record(&self.columns)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.flush()
    }
}

#[derive(Clone, Debug)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug)]
pub enum Plot {
    Lines { title: String, x_label: String, y_label: String, log_x: bool, log_y: bool, series: Vec<Series> },
    /// `z[iy][ix]` over the grid `xs × ys`; `NaN` cells are left blank.
    Heatmap { title: String, x_label: String, y_label: String, log_x: bool, xs: Vec<f64>, ys: Vec<f64>, z: Vec<Vec<f64>> },
}

const PALETTE: [RGBColor; 6] = [
    RGBColor(31, 119, 180),
    RGBColor(214, 39, 40),
    RGBColor(44, 160, 44),
    RGBColor(148, 103, 189),
    RGBColor(255, 127, 14),
    RGBColor(23, 190, 207),
];

type DrawResult = Result<(), Box<dyn std::error::Error>>;

fn bounds(values: impl Iterator<Item = f64>, log: bool) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values.filter(|v| v.is_finite() && (!log || *v > 0.0)) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return if log { (0.1, 10.0) } else { (0.0, 1.0) };
    }
    if log {
        if hi <= lo {
            return (lo / 2.0, hi * 2.0);
        }
        let pad = (hi / lo).powf(0.05);
        (lo / pad, hi * pad)
    } else {
        let pad = if hi > lo { 0.05 * (hi - lo) } else { 0.5 * lo.abs().max(1.0) };
        (lo - pad, hi + pad)
    }
}

fn draw_lines<X, Y>(
    root: &DrawingArea<SVGBackend, plotters::coord::Shift>,
    title: &str,
    labels: (&str, &str),
    x: X,
    y: Y,
    series: &[Series],
) -> DrawResult
where
    X: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    Y: plotters::coord::ranged1d::AsRangedCoord<Value = f64>,
    X::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
    Y::CoordDescType: plotters::coord::ranged1d::ValueFormatter<f64>,
{
    let mut chart = ChartBuilder::on(root)
        .caption(title, ("sans-serif", 20))
        .margin(15)
        .x_label_area_size(40)
        .y_label_area_size(60)
        .build_cartesian_2d(x, y)?;
    chart.configure_mesh().x_desc(labels.0).y_desc(labels.1).draw()?;
    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let pts: Vec<(f64, f64)> = s.points.iter().copied().filter(|(a, b)| a.is_finite() && b.is_finite()).collect();
        chart
            .draw_series(LineSeries::new(pts.clone(), color.stroke_width(2)))?
            .label(s.label.as_str())
            .legend(move |(x, y)| PathElement::new(vec![(x, y), (x + 20, y)], color.stroke_width(2)));
        chart.draw_series(pts.iter().map(|&p| Circle::new(p, 3, color.filled())))?;
    }
    if series.len() > 1 {
        chart.configure_series_labels().background_style(WHITE.mix(0.8)).border_style(BLACK).draw()?;
    }
    Ok(())
}

/// Blue to yellow through green.
fn heat_color(t: f64) -> RGBColor {
    let t = t.clamp(0.0, 1.0);
    let lerp = |a: f64, b: f64, s: f64| (a + (b - a) * s).round() as u8;
    if t < 0.5 {
        let s = 2.0 * t;
        RGBColor(lerp(68.0, 33.0, s), lerp(1.0, 145.0, s), lerp(84.0, 140.0, s))
    } else {
        let s = 2.0 * t - 1.0;
        RGBColor(lerp(33.0, 253.0, s), lerp(145.0, 231.0, s), lerp(140.0, 37.0, s))
    }
}

/// Cell edges halfway between neighbouring grid points.
fn edges(v: &[f64], log: bool) -> Vec<f64> {
    let t: Vec<f64> = v.iter().map(|x| if log { x.ln() } else { *x }).collect();
    let n = t.len();
    let mut e = Vec::with_capacity(n + 1);
    let half = |i: usize| if n > 1 { 0.5 * (t[i + 1] - t[i]) } else { 0.5 };
    e.push(t[0] - half(0));
    for i in 0..n.saturating_sub(1) {
        e.push(0.5 * (t[i] + t[i + 1]));
    }
    e.push(t[n - 1] + half(n.saturating_sub(2)));
    e.into_iter().map(|x| if log { x.exp() } else { x }).collect()
}

fn draw_cells<X>(
    chart: &mut ChartContext<'_, SVGBackend, Cartesian2d<X, plotters::coord::types::RangedCoordf64>>,
    ex: &[f64],
    ey: &[f64],
    z: &[Vec<f64>],
    (zlo, span): (f64, f64),
) -> DrawResult
where
    X: Ranged<ValueType = f64>,
{
    for (iy, row) in z.iter().enumerate() {
        for (ix, v) in row.iter().enumerate() {
            if v.is_finite() {
                let c = heat_color((v - zlo) / span);
                chart.draw_series(std::iter::once(Rectangle::new(
                    [(ex[ix], ey[iy]), (ex[ix + 1], ey[iy + 1])],
                    c.filled(),
                )))?;
            }
        }
    }
    Ok(())
}

pub fn write_svg(plot: &Plot, path: &Path) -> DrawResult {
    let root = SVGBackend::new(path, (800, 560)).into_drawing_area();
    root.fill(&WHITE)?;
    match plot {
        Plot::Lines { title, x_label, y_label, log_x, log_y, series } => {
            let (x0, x1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)), *log_x);
            let (y0, y1) = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)), *log_y);
            let labels = (x_label.as_str(), y_label.as_str());
            match (log_x, log_y) {
                (false, false) => draw_lines(&root, title, labels, x0..x1, y0..y1, series)?,
                (true, false) => draw_lines(&root, title, labels, (x0..x1).log_scale(), y0..y1, series)?,
                (false, true) => draw_lines(&root, title, labels, x0..x1, (y0..y1).log_scale(), series)?,
                (true, true) => draw_lines(&root, title, labels, (x0..x1).log_scale(), (y0..y1).log_scale(), series)?,
            }
        }
        Plot::Heatmap { title, x_label, y_label, log_x, xs, ys, z } => {
            let ex = edges(xs, *log_x);
            let ey = edges(ys, false);
            let (zlo, zhi) = z.iter().flatten().filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |a, v| (a.0.min(*v), a.1.max(*v)));
            let span = if zhi > zlo { zhi - zlo } else { 1.0 };
            let (x0, x1) = (ex[0], ex[ex.len() - 1]);
            let (y0, y1) = (ey[0], ey[ey.len() - 1]);
            let (area, legend) = root.split_horizontally(700);
            let mut builder = ChartBuilder::on(&area);
            builder.caption(title.as_str(), ("sans-serif", 20)).margin(15).x_label_area_size(40).y_label_area_size(60);
            if *log_x {
                let mut chart = builder.build_cartesian_2d((x0..x1).log_scale(), y0..y1)?;
                chart.configure_mesh().disable_mesh().x_desc(x_label.as_str()).y_desc(y_label.as_str()).draw()?;
                draw_cells(&mut chart, &ex, &ey, z, (zlo, span))?;
            } else {
                let mut chart = builder.build_cartesian_2d(x0..x1, y0..y1)?;
                chart.configure_mesh().disable_mesh().x_desc(x_label.as_str()).y_desc(y_label.as_str()).draw()?;
                draw_cells(&mut chart, &ex, &ey, z, (zlo, span))?;
            }
            let mut bar = ChartBuilder::on(&legend)
                .margin_top(50)
                .margin_bottom(55)
                .y_label_area_size(50)
                .build_cartesian_2d(0.0..1.0, zlo..zlo + span)?;
            bar.configure_mesh().disable_mesh().disable_x_axis().draw()?;
            let steps = 64;
            bar.draw_series((0..steps).map(|k| {
                let (a, b) = (k as f64 / steps as f64, (k + 1) as f64 / steps as f64);
                Rectangle::new([(0.0, zlo + a * span), (1.0, zlo + b * span)], heat_color(a).filled())
            }))?;
        }
    }
    root.present()?;
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub experiment: String,
    /// Figure or section this experiment reproduces.
    pub reference: String,
    pub description: String,
    pub seed: u64,
    pub params: serde_json::Value,
    pub config_hash: String,
    pub git_revision: String,
    pub version: String,
    pub columns: Vec<String>,
    pub rows: usize,
    pub runtime_seconds: f64,
    pub timestamp_unix: u64,
    pub summary: serde_json::Value,
}

pub fn git_revision() -> String {
    std::process::Command::new("git")
        .args(["rev-parse", "HEAD"])
        .output()
        .ok()
        .filter(|o| o.status.success())
        .and_then(|o| String::from_utf8(o.stdout).ok())
        .map(|s| s.trim().to_string())
        .unwrap_or_else(|| "unknown".into())
}

pub fn artifact_path(dir: &Path, experiment: &str, ext: &str) -> PathBuf {
    dir.join(format!("{experiment}.{ext}"))
}
