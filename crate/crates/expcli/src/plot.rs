//! Minimal SVG figures: stacked panels of bar, line and point series,
//! each with a CSV sidecar holding exactly the plotted numbers.

use std::fmt::Write as _;

const PANEL_W: f64 = 640.0;
const PANEL_H: f64 = 340.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 36.0;
const MARGIN_B: f64 = 50.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SeriesKind {
    /// Bars centred at `x` with the given width in data units.
    Bars { width: f64 },
    Line,
    Points,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
    /// Half-length of a vertical error bar.
    pub err: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub name: String,
    pub kind: SeriesKind,
    pub points: Vec<Point>,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Figure {
    /// File stem of the `.svg` and `.csv` outputs.
    pub name: String,
    pub panels: Vec<Panel>,
}

impl Series {
    pub fn new(name: &str, kind: SeriesKind, points: Vec<Point>) -> Self {
        Self { name: name.to_string(), kind, points }
    }
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y, err: None }
    }

    pub fn with_err(x: f64, y: f64, err: f64) -> Self {
        Self { x, y, err: Some(err) }
    }
}

/// `panel,series,x,y,err` rows in plotting order.
pub fn sidecar_csv(fig: &Figure) -> String {
    let mut out = String::from("panel,series,x,y,err\n");
    for (p, panel) in fig.panels.iter().enumerate() {
        for s in &panel.series {
            for pt in &s.points {
                let err = pt.err.map(|e| e.to_string()).unwrap_or_default();
                let _ = writeln!(out, "{p},{},{},{},{err}", s.name, pt.x, pt.y);
            }
        }
    }
    out
}

struct Axis {
    lo: f64,
    hi: f64,
    log: bool,
}

impl Axis {
    fn fit(values: impl Iterator<Item = f64>, log: bool, include_zero: bool) -> Self {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in values {
            let v = if log { if v > 0.0 { v.log10() } else { continue } } else { v };
            if v.is_finite() {
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if include_zero && !log {
            lo = lo.min(0.0);
            hi = hi.max(0.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        let pad = 0.05 * (hi - lo);
        if log {
            Self { lo: lo - pad, hi: hi + pad, log }
        } else {
            Self { lo: if include_zero && lo == 0.0 { 0.0 } else { lo - pad }, hi: hi + pad, log }
        }
    }

    fn frac(&self, v: f64) -> f64 {
        let t = if self.log { v.max(f64::MIN_POSITIVE).log10() } else { v };
        (t - self.lo) / (self.hi - self.lo)
    }

    fn ticks(&self) -> Vec<(f64, String)> {
        if self.log {
            let (a, b) = (self.lo.ceil() as i32, self.hi.floor() as i32);
            return (a..=b).map(|e| (10f64.powi(e), format!("1e{e}"))).collect();
        }
        let raw = (self.hi - self.lo) / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
        let mut out = Vec::new();
        let mut t = (self.lo / step).ceil() * step;
        while t <= self.hi + 1e-9 * step {
            let label = format!("{}", (t / step).round() * step);
            out.push((t, trim_float(&label)));
            t += step;
        }
        out
    }
}

fn trim_float(s: &str) -> String {
    match s.parse::<f64>() {
        Ok(v) if v.abs() < 1e-12 => "0".to_string(),
        Ok(v) => {
            let r = format!("{v:.6}");
            r.trim_end_matches('0').trim_end_matches('.').to_string()
        }
        Err(_) => s.to_string(),
    }
}

fn drawable(p: &Point) -> bool {
    p.x.is_finite() && p.y.is_finite()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

pub fn render_svg(fig: &Figure) -> String {
    let height = PANEL_H * fig.panels.len().max(1) as f64;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{PANEL_W}" height="{height}" viewBox="0 0 {PANEL_W} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (k, panel) in fig.panels.iter().enumerate() {
        render_panel(&mut svg, panel, k as f64 * PANEL_H);
    }
    svg.push_str("</svg>\n");
    svg
}

fn render_panel(svg: &mut String, panel: &Panel, top: f64) {
    let has_bars = panel.series.iter().any(|s| matches!(s.kind, SeriesKind::Bars { .. }));
    let xs = panel.series.iter().flat_map(|s| {
        s.points.iter().flat_map(move |p| match s.kind {
            SeriesKind::Bars { width } => [p.x - width / 2.0, p.x + width / 2.0],
            _ => [p.x, p.x],
        })
    });
    let ys = panel
        .series
        .iter()
        .flat_map(|s| s.points.iter().flat_map(|p| [p.y - p.err.unwrap_or(0.0), p.y + p.err.unwrap_or(0.0)]));
    let ax = Axis::fit(xs, panel.log_x, false);
    let ay = Axis::fit(ys, panel.log_y, has_bars);

    let (x0, x1) = (MARGIN_L, PANEL_W - MARGIN_R);
    let (y0, y1) = (top + PANEL_H - MARGIN_B, top + MARGIN_T);
    let px = |v: f64| x0 + ax.frac(v) * (x1 - x0);
    let py = |v: f64| y0 + ay.frac(v) * (y1 - y0);

    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="14">{}</text>"#,
        (x0 + x1) / 2.0,
        top + 20.0,
        escape(&panel.title)
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for (t, label) in ax.ticks() {
        let x = px(t);
        let _ = writeln!(svg, r#"<line x1="{x:.2}" y1="{y0}" x2="{x:.2}" y2="{}" stroke="black"/>"#, y0 + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{label}</text>"#, y0 + 18.0);
    }
    for (t, label) in ay.ticks() {
        let y = py(t);
        let _ = writeln!(svg, r#"<line x1="{}" y1="{y:.2}" x2="{x0}" y2="{y:.2}" stroke="black"/>"#, x0 - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{label}</text>"#, x0 - 8.0, y + 4.0);
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        y0 + 38.0,
        escape(&panel.x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text transform="translate({},{}) rotate(-90)" text-anchor="middle">{}</text>"#,
        x0 - 50.0,
        (y0 + y1) / 2.0,
        escape(&panel.y_label)
    );

    for (k, s) in panel.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        match s.kind {
            SeriesKind::Bars { width } => {
                for p in s.points.iter().filter(|p| drawable(p)) {
                    let (l, r) = (px(p.x - width / 2.0), px(p.x + width / 2.0));
                    let (yt, yb) = (py(p.y), py(if ay.log { 10f64.powf(ay.lo) } else { 0.0 }));
                    let _ = writeln!(
                        svg,
                        r#"<rect x="{l:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.45" stroke="{color}" stroke-width="0.5"/>"#,
                        yt.min(yb),
                        (r - l).max(0.0),
                        (yb - yt).abs()
                    );
                }
            }
            SeriesKind::Line => {
                let pts: Vec<String> = s.points.iter().filter(|p| drawable(p)).map(|p| format!("{:.2},{:.2}", px(p.x), py(p.y))).collect();
                let _ = writeln!(
                    svg,
                    r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                    pts.join(" ")
                );
            }
            SeriesKind::Points => {
                for p in s.points.iter().filter(|p| drawable(p)) {
                    let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, px(p.x), py(p.y));
                }
            }
        }
        for p in s.points.iter().filter(|p| drawable(p)) {
            if let Some(e) = p.err {
                let x = px(p.x);
                let _ = writeln!(
                    svg,
                    r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}"/>"#,
                    py(p.y - e),
                    py(p.y + e)
                );
            }
        }
        let ly = y1 + 16.0 + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="12" height="8" fill="{color}"/>"#, x1 - 150.0, ly - 8.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}">{}</text>"#, x1 - 132.0, escape(&s.name));
    }
}
