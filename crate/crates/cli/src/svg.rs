//! Minimal SVG emitters: polylines and filled rectangles on a fixed viewBox.

use std::fmt::Write;

use triad_core::regimes::DiagramGrid;
use triad_core::RegimeKind;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 140.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub fn regime_color(kind: RegimeKind) -> &'static str {
    match kind {
        RegimeKind::Shd => "#4c72b0",
        RegimeKind::Mr => "#dd8452",
        RegimeKind::Sld => "#55a868",
        RegimeKind::Unresolved => "#7f7f7f",
    }
}

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub points: Vec<(f64, f64)>,
}

struct Frame {
    x: (f64, f64),
    y: (f64, f64),
}

impl Frame {
    fn new(x: (f64, f64), y: (f64, f64)) -> Self {
        let widen = |(lo, hi): (f64, f64)| {
            if hi > lo {
                (lo, hi)
            } else {
                let pad = if lo == 0.0 { 1.0 } else { 0.05 * lo.abs() };
                (lo - pad, hi + pad)
            }
        };
        Frame {
            x: widen(x),
            y: widen(y),
        }
    }

    fn px(&self, v: f64) -> f64 {
        LEFT + (v - self.x.0) / (self.x.1 - self.x.0) * (WIDTH - LEFT - RIGHT)
    }

    fn py(&self, v: f64) -> f64 {
        HEIGHT - BOTTOM - (v - self.y.0) / (self.y.1 - self.y.0) * (HEIGHT - TOP - BOTTOM)
    }
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.3}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="14">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        escape(title)
    );
    s
}

fn axes(s: &mut String, f: &Frame, xlabel: &str, ylabel: &str) {
    let (x0, x1) = (LEFT, WIDTH - RIGHT);
    let (y0, y1) = (HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r#"<rect x="{x0:.2}" y="{y1:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="black"/>"#,
        x1 - x0,
        y0 - y1
    );
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let xv = f.x.0 + frac * (f.x.1 - f.x.0);
        let yv = f.y.0 + frac * (f.y.1 - f.y.0);
        let (px, py) = (f.px(xv), f.py(yv));
        let _ = writeln!(
            s,
            r#"<line x1="{px:.2}" y1="{y0:.2}" x2="{px:.2}" y2="{:.2}" stroke="black"/><text x="{px:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            y0 + 5.0,
            y0 + 18.0,
            tick_label(xv)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{:.2}" y1="{py:.2}" x2="{x0:.2}" y2="{py:.2}" stroke="black"/><text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            x0 - 5.0,
            x0 - 8.0,
            py + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 18.0,
        escape(xlabel)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(ylabel)
    );
}

fn legend(s: &mut String, entries: &[(&str, &str, bool)]) {
    let x = WIDTH - RIGHT + 15.0;
    for (i, (name, color, filled)) in entries.iter().enumerate() {
        let y = TOP + 10.0 + 20.0 * i as f64;
        if *filled {
            let _ = writeln!(
                s,
                r#"<rect x="{x:.2}" y="{:.2}" width="14" height="10" fill="{color}"/>"#,
                y - 9.0
            );
        } else {
            let _ = writeln!(
                s,
                r#"<line x1="{x:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/>"#,
                y - 4.0,
                x + 14.0,
                y - 4.0
            );
        }
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{y:.2}">{}</text>"#,
            x + 20.0,
            escape(name)
        );
    }
}

fn polylines(s: &mut String, f: &Frame, series: &[Series]) {
    for line in series {
        // break the line wherever a value is missing
        for run in line
            .points
            .split(|(x, y)| !x.is_finite() || !y.is_finite())
            .filter(|r| !r.is_empty())
        {
            let pts: Vec<String> = run
                .iter()
                .map(|&(x, y)| format!("{:.2},{:.2}", f.px(x), f.py(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="1.5" clip-path="url(#plot)"/>"#,
                pts.join(" "),
                line.color
            );
        }
    }
}

fn clip(s: &mut String) {
    let _ = writeln!(
        s,
        r#"<defs><clipPath id="plot"><rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}"/></clipPath></defs>"#,
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        })
}

/// Line plot of several series sharing the x axis.
pub fn line_plot(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let x = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let (x, y) = if x.0.is_finite() {
        (x, y)
    } else {
        ((0.0, 1.0), (0.0, 1.0))
    };
    let f = Frame::new(x, y);
    let mut s = open(title);
    clip(&mut s);
    axes(&mut s, &f, xlabel, ylabel);
    polylines(&mut s, &f, series);
    let entries: Vec<(&str, &str, bool)> =
        series.iter().map(|l| (l.name, l.color, false)).collect();
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}

/// Cell edges halfway between axis points.
fn edges(axis: &[f64]) -> Vec<f64> {
    match axis.len() {
        0 => Vec::new(),
        1 => {
            let pad = if axis[0] == 0.0 {
                0.5
            } else {
                0.05 * axis[0].abs()
            };
            vec![axis[0] - pad, axis[0] + pad]
        }
        n => {
            let mut e = Vec::with_capacity(n + 1);
            e.push(axis[0] - (axis[1] - axis[0]) / 2.0);
            for w in axis.windows(2) {
                e.push((w[0] + w[1]) / 2.0);
            }
            e.push(axis[n - 1] + (axis[n - 1] - axis[n - 2]) / 2.0);
            e
        }
    }
}

/// Regime heatmap with Δμ across and κ upward, plus optional curves.
pub fn heatmap(title: &str, grid: &DiagramGrid, overlays: &[Series]) -> String {
    let ex = edges(&grid.dmu_axis);
    let ey = edges(&grid.kappa_axis);
    let f = Frame::new((ex[0], ex[ex.len() - 1]), (ey[0], ey[ey.len() - 1]));
    let mut s = open(title);
    clip(&mut s);
    for (i, row) in grid.labels.iter().enumerate() {
        for (j, label) in row.iter().enumerate() {
            let (xa, xb) = (f.px(ex[i]), f.px(ex[i + 1]));
            let (ya, yb) = (f.py(ey[j + 1]), f.py(ey[j]));
            let _ = writeln!(
                s,
                r#"<rect x="{xa:.2}" y="{ya:.2}" width="{:.2}" height="{:.2}" fill="{}"><title>{}</title></rect>"#,
                xb - xa,
                yb - ya,
                regime_color(label.kind),
                label.short()
            );
        }
    }
    polylines(&mut s, &f, overlays);
    axes(&mut s, &f, "Δμ", "κ");
    let mut entries: Vec<(&str, &str, bool)> = [
        RegimeKind::Shd,
        RegimeKind::Mr,
        RegimeKind::Sld,
        RegimeKind::Unresolved,
    ]
    .iter()
    .map(|&k| (k.as_str(), regime_color(k), true))
    .collect();
    entries.extend(overlays.iter().map(|l| (l.name, l.color, false)));
    legend(&mut s, &entries);
    s.push_str("</svg>\n");
    s
}
