//! Static SVG figures. Every plotted mark carries its exact data values in
//! `data-*` attributes; positions are only for looking at.

use std::fmt::Write;

use crate::formats::num;

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 240.0;
const MARGIN: f64 = 40.0;
const COLORS: [&str; 6] = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#666666"];

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

pub struct Series {
    pub name: String,
    /// (x, y); missing y values are kept as attributes-only markers.
    pub points: Vec<(f64, Option<f64>)>,
}

pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
    pub lines: bool,
}

struct Scale {
    lo: f64,
    hi: f64,
    from: f64,
    to: f64,
}

impl Scale {
    fn new(values: impl Iterator<Item = f64>, from: f64, to: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-12 {
            lo -= 0.5;
            hi += 0.5;
        }
        Self { lo, hi, from, to }
    }

    fn at(&self, v: f64) -> f64 {
        self.from + (v - self.lo) / (self.hi - self.lo) * (self.to - self.from)
    }
}

fn panel(out: &mut String, p: &Panel, ox: f64, oy: f64) {
    let xs = Scale::new(
        p.series.iter().flat_map(|s| s.points.iter().map(|q| q.0)),
        MARGIN,
        PANEL_W - 10.0,
    );
    let ys = Scale::new(
        p.series.iter().flat_map(|s| s.points.iter().filter_map(|q| q.1)),
        PANEL_H - MARGIN,
        20.0,
    );
    let _ = writeln!(
        out,
        r#"<g class="panel" transform="translate({ox},{oy})" data-title="{}" data-x-label="{}" data-y-label="{}">"#,
        escape(&p.title),
        escape(&p.x_label),
        escape(&p.y_label)
    );
    let _ = writeln!(
        out,
        r##"<rect x="{MARGIN}" y="20" width="{}" height="{}" fill="none" stroke="#999999"/>"##,
        PANEL_W - 10.0 - MARGIN,
        PANEL_H - MARGIN - 20.0
    );
    let _ = writeln!(out, r#"<text x="{}" y="14" font-size="12">{}</text>"#, MARGIN, escape(&p.title));
    let _ = writeln!(
        out,
        r#"<text x="{}" y="{}" font-size="10">{}</text>"#,
        MARGIN,
        PANEL_H - 8.0,
        escape(&p.x_label)
    );
    for (k, s) in p.series.iter().enumerate() {
        let color = COLORS[k % COLORS.len()];
        let _ = writeln!(out, r#"<g class="series" data-series="{}">"#, escape(&s.name));
        if p.lines {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter_map(|&(x, y)| y.map(|y| format!("{:.2},{:.2}", xs.at(x), ys.at(y))))
                .collect();
            if pts.len() > 1 {
                let _ = writeln!(
                    out,
                    r#"<polyline fill="none" stroke="{color}" points="{}"/>"#,
                    pts.join(" ")
                );
            }
        }
        for &(x, y) in &s.points {
            match y {
                Some(y) => {
                    let _ = writeln!(
                        out,
                        r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}" data-x="{}" data-y="{}"/>"#,
                        xs.at(x),
                        ys.at(y),
                        num(x),
                        num(y)
                    );
                }
                None => {
                    let _ = writeln!(out, r#"<circle r="0" data-x="{}" data-y=""/>"#, num(x));
                }
            }
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" font-size="9" fill="{color}">{}</text>"#,
            MARGIN + 4.0,
            32.0 + 11.0 * k as f64,
            escape(&s.name)
        );
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n");
}

/// Panels laid out in rows of `columns`.
pub fn figure(title: &str, panels: &[Panel], columns: usize) -> String {
    let columns = columns.max(1);
    let rows = panels.len().div_ceil(columns).max(1);
    let w = PANEL_W * columns.min(panels.len().max(1)) as f64;
    let h = PANEL_H * rows as f64 + 24.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" data-title="{}">"#,
        escape(title)
    );
    let _ = writeln!(out, r#"<text x="8" y="16" font-size="14">{}</text>"#, escape(title));
    for (i, p) in panels.iter().enumerate() {
        let ox = PANEL_W * (i % columns) as f64;
        let oy = 24.0 + PANEL_H * (i / columns) as f64;
        panel(&mut out, p, ox, oy);
    }
    out.push_str("</svg>\n");
    out
}

/// Square matrix of correlations; `None` cells are unavailable.
pub fn correlogram(title: &str, names: &[&str], r: &[Vec<Option<f64>>]) -> String {
    let cell = 70.0;
    let left = 130.0;
    let top = 40.0;
    let size = left + cell * names.len() as f64 + 10.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{}" data-title="{}">"#,
        top + cell * names.len() as f64 + 10.0,
        escape(title)
    );
    let _ = writeln!(out, r#"<text x="8" y="16" font-size="14">{}</text>"#, escape(title));
    for (i, a) in names.iter().enumerate() {
        let _ = writeln!(
            out,
            r#"<text x="4" y="{:.1}" font-size="10">{}</text>"#,
            top + cell * (i as f64 + 0.55),
            escape(a)
        );
        for (j, b) in names.iter().enumerate() {
            let v = r[i][j];
            let fill = match v {
                Some(v) if v >= 0.0 => format!("rgb(255,{0},{0})", (255.0 * (1.0 - v)).round() as u8),
                Some(v) => format!("rgb({0},{0},255)", (255.0 * (1.0 + v)).round() as u8),
                None => "#eee".to_string(),
            };
            let _ = writeln!(
                out,
                r#"<rect x="{:.1}" y="{:.1}" width="{cell}" height="{cell}" fill="{fill}" stroke="white" data-var-a="{}" data-var-b="{}" data-r="{}"/>"#,
                left + cell * j as f64,
                top + cell * i as f64,
                escape(a),
                escape(b),
                v.map(num).unwrap_or_default()
            );
            if let Some(v) = v {
                let _ = writeln!(
                    out,
                    r#"<text x="{:.1}" y="{:.1}" font-size="11" text-anchor="middle">{v:.2}</text>"#,
                    left + cell * (j as f64 + 0.5),
                    top + cell * (i as f64 + 0.55)
                );
            }
        }
    }
    out.push_str("</svg>\n");
    out
}
