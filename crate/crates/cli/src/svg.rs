//! Minimal dependency-free SVG line/scatter charts.

use std::fmt::Write;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 56.0;
const MARGIN_R: f64 = 16.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 44.0;

const PALETTE: [&str; 5] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];

/// How a series is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Markers,
    Line,
    DashedLine,
}

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub style: Style,
    /// (x, y, optional symmetric error)
    pub points: Vec<(f64, f64, Option<f64>)>,
}

impl Series {
    pub fn markers(name: &str, points: Vec<(f64, f64, Option<f64>)>) -> Self {
        Self {
            name: name.into(),
            style: Style::Markers,
            points,
        }
    }

    pub fn line(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            name: name.into(),
            style: Style::Line,
            points: points.into_iter().map(|(x, y)| (x, y, None)).collect(),
        }
    }

    pub fn dashed(name: &str, points: Vec<(f64, f64)>) -> Self {
        Self {
            style: Style::DashedLine,
            ..Self::line(name, points)
        }
    }
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

impl Panel {
    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (
            f64::INFINITY,
            f64::NEG_INFINITY,
            f64::INFINITY,
            f64::NEG_INFINITY,
        );
        for (x, y, e) in self.series.iter().flat_map(|s| &s.points) {
            if !(x.is_finite() && y.is_finite()) {
                continue;
            }
            let e = e.unwrap_or(0.0);
            b = (b.0.min(*x), b.1.max(*x), b.2.min(y - e), b.3.max(y + e));
        }
        if !b.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        if b.1 - b.0 < 1e-12 {
            b = (b.0 - 0.5, b.1 + 0.5, b.2, b.3);
        }
        let pad = ((b.3 - b.2) * 0.08).max(0.05);
        (b.0, b.1, b.2 - pad, b.3 + pad)
    }

    fn render(&self, out: &mut String, ox: f64, oy: f64) {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = PANEL_W - MARGIN_L - MARGIN_R;
        let ph = PANEL_H - MARGIN_T - MARGIN_B;
        let sx = |x: f64| ox + MARGIN_L + (x - x0) / (x1 - x0) * pw;
        let sy = |y: f64| oy + MARGIN_T + (y1 - y) / (y1 - y0) * ph;

        let _ = writeln!(
            out,
            r##"<rect x="{:.1}" y="{:.1}" width="{pw:.1}" height="{ph:.1}" fill="none" stroke="#444"/>"##,
            ox + MARGIN_L,
            oy + MARGIN_T
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="14">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy + 20.0,
            escape(&self.title)
        );
        for i in 0..=4 {
            let fx = x0 + (x1 - x0) * i as f64 / 4.0;
            let fy = y0 + (y1 - y0) * i as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="10">{fx:.3}</text>"#,
                sx(fx),
                oy + PANEL_H - MARGIN_B + 14.0
            );
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="10">{fy:.3}</text>"#,
                ox + MARGIN_L - 4.0,
                sy(fy) + 3.0
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}</text>"#,
            ox + MARGIN_L + pw / 2.0,
            oy + PANEL_H - 8.0,
            escape(&self.x_label)
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 {:.1} {:.1})">{}</text>"#,
            ox + 14.0,
            oy + MARGIN_T + ph / 2.0,
            ox + 14.0,
            oy + MARGIN_T + ph / 2.0,
            escape(&self.y_label)
        );

        for (k, s) in self.series.iter().enumerate() {
            let color = PALETTE[k % PALETTE.len()];
            let pts: Vec<_> = s
                .points
                .iter()
                .filter(|(x, y, _)| x.is_finite() && y.is_finite())
                .collect();
            match s.style {
                Style::Markers => {
                    for (x, y, e) in pts {
                        if let Some(e) = e.filter(|e| *e > 0.0) {
                            let _ = writeln!(
                                out,
                                r#"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="{color}"/>"#,
                                sx(*x),
                                sy(y - e),
                                sy(y + e)
                            );
                        }
                        let _ = writeln!(
                            out,
                            r#"<circle cx="{:.1}" cy="{:.1}" r="3.5" fill="{color}"/>"#,
                            sx(*x),
                            sy(*y)
                        );
                    }
                }
                Style::Line | Style::DashedLine => {
                    let path: Vec<String> = pts
                        .iter()
                        .map(|(x, y, _)| format!("{:.1},{:.1}", sx(*x), sy(*y)))
                        .collect();
                    let dash = if s.style == Style::DashedLine {
                        r#" stroke-dasharray="5,4""#
                    } else {
                        ""
                    };
                    let _ = writeln!(
                        out,
                        r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#,
                        path.join(" ")
                    );
                }
            }
            let _ = writeln!(
                out,
                r#"<text x="{:.1}" y="{:.1}" font-size="11" fill="{color}">{}</text>"#,
                ox + MARGIN_L + 6.0,
                oy + MARGIN_T + 14.0 + 13.0 * k as f64,
                escape(&s.name)
            );
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Lays panels out on a grid with `columns` columns.
pub fn render(panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let (w, h) = (PANEL_W * columns as f64, PANEL_H * rows as f64);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\" font-family=\"sans-serif\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    );
    for (i, p) in panels.iter().enumerate() {
        p.render(
            &mut out,
            PANEL_W * (i % columns) as f64,
            PANEL_H * (i / columns) as f64,
        );
    }
    out.push_str("</svg>\n");
    out
}
