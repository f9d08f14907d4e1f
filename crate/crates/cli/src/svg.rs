//! Minimal self-contained SVG line and region plots. Output depends only on
//! the input data, so identical data gives identical bytes.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stroke {
    Solid,
    Dashed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub stroke: Stroke,
}

impl Series {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Self {
        Self {
            label: label.into(),
            points,
            stroke: Stroke::Solid,
        }
    }

    pub fn dashed(mut self) -> Self {
        self.stroke = Stroke::Dashed;
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinePlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_y: bool,
    pub series: Vec<Series>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Maps data coordinates onto the plot area.
struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        LEFT + (x - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - BOTTOM - (y - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn widen(lo: f64, hi: f64) -> (f64, f64) {
    if hi > lo {
        (lo, hi)
    } else {
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        (lo - pad, hi + pad)
    }
}

fn header(out: &mut String, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect width="100%" height="100%" fill="white"/>
<text x="{:.1}" y="24" text-anchor="middle" font-size="14">{}</text>
"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
}

fn axes(out: &mut String, frame: &Frame, x_label: &str, y_label: &str, log_y: bool) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        out,
        r#"<rect x="{x0:.1}" y="{y1:.1}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for i in 0..=5 {
        let v = frame.x.0 + (frame.x.1 - frame.x.0) * i as f64 / 5.0;
        let px = frame.px(v);
        let _ = writeln!(
            out,
            r#"<line x1="{px:.1}" y1="{y0:.1}" x2="{px:.1}" y2="{:.1}" stroke="black"/><text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(v)
        );
    }
    for i in 0..=5 {
        let v = frame.y.0 + (frame.y.1 - frame.y.0) * i as f64 / 5.0;
        let py = frame.py(v);
        let label = tick_label(if log_y { 10f64.powf(v) } else { v });
        let _ = writeln!(
            out,
            r#"<line x1="{:.1}" y1="{py:.1}" x2="{x0:.1}" y2="{py:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{label}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        out,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn polyline(out: &mut String, frame: &Frame, points: &[(f64, f64)], color: &str, stroke: Stroke) {
    let mut d = String::new();
    for (i, &(x, y)) in points.iter().enumerate() {
        let _ = write!(d, "{}{:.2},{:.2}", if i == 0 { "" } else { " " }, frame.px(x), frame.py(y));
    }
    let dash = match stroke {
        Stroke::Solid => "",
        Stroke::Dashed => r#" stroke-dasharray="6 4""#,
    };
    let _ = writeln!(
        out,
        r#"<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"{dash} clip-path="url(#plot)"/>"#
    );
}

fn clip(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<defs><clipPath id="plot"><rect x="{LEFT:.1}" y="{TOP:.1}" width="{:.1}" height="{:.1}"/></clipPath></defs>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
}

fn legend(out: &mut String, entries: &[(String, String, Stroke)]) {
    for (i, (label, color, stroke)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 18.0 * i as f64;
        let x = WIDTH - RIGHT + 12.0;
        let dash = match stroke {
            Stroke::Solid => "",
            Stroke::Dashed => r#" stroke-dasharray="6 4""#,
        };
        let _ = writeln!(
            out,
            r#"<line x1="{x:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="{color}" stroke-width="2"{dash}/><text x="{:.1}" y="{:.1}">{}</text>"#,
            x + 22.0,
            x + 28.0,
            y + 4.0,
            escape(label)
        );
    }
}

impl LinePlot {
    pub fn render(&self) -> String {
        let transform = |y: f64| if self.log_y { y.log10() } else { y };
        let usable = |&(x, y): &(f64, f64)| x.is_finite() && transform(y).is_finite();
        let series: Vec<Vec<(f64, f64)>> = self
            .series
            .iter()
            .map(|s| s.points.iter().filter(|p| usable(p)).map(|&(x, y)| (x, transform(y))).collect())
            .collect();
        let all = series.iter().flatten();
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in all {
            xlo = xlo.min(x);
            xhi = xhi.max(x);
            ylo = ylo.min(y);
            yhi = yhi.max(y);
        }
        if !xlo.is_finite() {
            (xlo, xhi, ylo, yhi) = (0.0, 1.0, 0.0, 1.0);
        }
        let (ylo, yhi) = widen(ylo, yhi);
        let pad = 0.04 * (yhi - ylo);
        let frame = Frame {
            x: widen(xlo, xhi),
            y: (ylo - pad, yhi + pad),
        };

        let mut out = String::new();
        header(&mut out, &self.title);
        clip(&mut out);
        let y_label = if self.log_y {
            format!("{} (log scale)", self.y_label)
        } else {
            self.y_label.clone()
        };
        axes(&mut out, &frame, &self.x_label, &y_label, self.log_y);
        let mut entries = Vec::new();
        for (i, (s, pts)) in self.series.iter().zip(&series).enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            polyline(&mut out, &frame, pts, color, s.stroke);
            entries.push((s.label.clone(), color.to_string(), s.stroke));
        }
        legend(&mut out, &entries);
        out.push_str("</svg>\n");
        out
    }
}

/// Categorical map on a regular grid, with curves drawn on top.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionPlot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Row-major category index per node, `y` outer; `None` is left blank.
    pub cells: Vec<Option<usize>>,
    pub categories: Vec<(String, String)>,
    pub overlays: Vec<Series>,
}

impl RegionPlot {
    pub fn render(&self) -> String {
        let frame = Frame {
            x: widen(self.x[0], self.x[self.x.len() - 1]),
            y: widen(self.y[0], self.y[self.y.len() - 1]),
        };
        let cols = self.x.len();
        let half = |v: &[f64], i: usize| {
            let step = (v[v.len() - 1] - v[0]) / (v.len() - 1) as f64;
            (v[i] - step / 2.0, v[i] + step / 2.0)
        };
        let mut out = String::new();
        header(&mut out, &self.title);
        clip(&mut out);
        let _ = writeln!(out, r#"<g clip-path="url(#plot)" shape-rendering="crispEdges">"#);
        for (r, _) in self.y.iter().enumerate() {
            let (ylo, yhi) = half(&self.y, r);
            // merge runs of equal category along the row
            let mut c = 0;
            while c < cols {
                let cat = self.cells[r * cols + c];
                let start = c;
                while c < cols && self.cells[r * cols + c] == cat {
                    c += 1;
                }
                if let Some(k) = cat {
                    let (xlo, _) = half(&self.x, start);
                    let (_, xhi) = half(&self.x, c - 1);
                    let _ = writeln!(
                        out,
                        r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
                        frame.px(xlo),
                        frame.py(yhi),
                        frame.px(xhi) - frame.px(xlo),
                        frame.py(ylo) - frame.py(yhi),
                        self.categories[k].1
                    );
                }
            }
        }
        out.push_str("</g>\n");
        axes(&mut out, &frame, &self.x_label, &self.y_label, false);
        for s in &self.overlays {
            polyline(&mut out, &frame, &s.points, "black", s.stroke);
        }
        let mut entries: Vec<(String, String, Stroke)> = self
            .categories
            .iter()
            .map(|(l, c)| (l.clone(), c.clone(), Stroke::Solid))
            .collect();
        let mut seen = Vec::new();
        for s in &self.overlays {
            if !seen.contains(&s.label) {
                seen.push(s.label.clone());
                entries.push((s.label.clone(), "black".into(), s.stroke));
            }
        }
        legend(&mut out, &entries);
        out.push_str("</svg>\n");
        out
    }
}
