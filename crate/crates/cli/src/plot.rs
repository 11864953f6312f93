//! Minimal SVG line plot: fixed 800×600 canvas, one polyline per series.

use std::fmt::Write;

pub struct Series<'a> {
    pub name: &'a str,
    pub color: &'a str,
    pub values: &'a [f64],
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 50.0;
const BOTTOM: f64 = 70.0;

/// Tick spacing of 1, 2 or 5 times a power of ten giving about `target` ticks.
fn tick_step(span: f64, target: f64) -> f64 {
    let raw = span / target;
    let mag = 10f64.powf(raw.log10().floor());
    [1.0, 2.0, 5.0, 10.0]
        .into_iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag)
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values
        .filter(|v| v.is_finite())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    if !lo.is_finite() {
        (-1.0, 1.0)
    } else if hi - lo < 1e-12 {
        (lo - 1.0, hi + 1.0)
    } else {
        let pad = 0.05 * (hi - lo);
        (lo - pad, hi + pad)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

pub fn render(title: &str, x_label: &str, y_label: &str, t: &[f64], series: &[Series]) -> String {
    let (x0, x1) = range(t.iter().copied());
    let (y0, y1) = range(series.iter().flat_map(|s| s.values.iter().copied()));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + (y1 - y) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {WIDTH} {HEIGHT}" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="13">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
    );
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="28" text-anchor="middle" font-size="16">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // Axes and ticks.
    let _ = writeln!(
        svg,
        r#"<g stroke="black" fill="none"><rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}"/></g>"#
    );
    let step = tick_step(x1 - x0, 8.0);
    let mut x = (x0 / step).ceil() * step;
    while x <= x1 + 1e-9 * step {
        let px = sx(x);
        let _ = writeln!(
            svg,
            r#"<line x1="{px:.2}" y1="{b}" x2="{px:.2}" y2="{b2}" stroke="black"/><text x="{px:.2}" y="{ty}" text-anchor="middle">{}</text>"#,
            tick_label(x, step),
            b = TOP + ph,
            b2 = TOP + ph + 5.0,
            ty = TOP + ph + 20.0,
        );
        x += step;
    }
    let step = tick_step(y1 - y0, 6.0);
    let mut y = (y0 / step).ceil() * step;
    while y <= y1 + 1e-9 * step {
        let py = sy(y);
        let _ = writeln!(
            svg,
            r#"<line x1="{l2}" y1="{py:.2}" x2="{LEFT}" y2="{py:.2}" stroke="black"/><text x="{tx}" y="{ty:.2}" text-anchor="end">{}</text>"#,
            tick_label(y, step),
            l2 = LEFT - 5.0,
            tx = LEFT - 8.0,
            ty = py + 4.0,
        );
        y += step;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 20.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="22" y="{cy}" text-anchor="middle" transform="rotate(-90 22 {cy})">{}</text>"#,
        escape(y_label),
        cy = TOP + ph / 2.0,
    );

    for s in series {
        let mut points = String::new();
        for (ti, v) in t.iter().zip(s.values) {
            if v.is_finite() {
                let _ = write!(points, "{:.2},{:.2} ", sx(*ti), sy(*v));
            }
        }
        let _ = writeln!(
            svg,
            r#"<polyline data-series="{}" fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            escape(s.name),
            s.color,
            points.trim_end()
        );
    }

    // Legend in the upper right corner of the plot area.
    let lx = LEFT + pw - 215.0;
    let ly = TOP + 10.0;
    let _ = writeln!(
        svg,
        r#"<rect x="{lx}" y="{ly}" width="205" height="{}" fill="white" stroke="gray"/>"#,
        10.0 + 20.0 * series.len() as f64
    );
    for (i, s) in series.iter().enumerate() {
        let y = ly + 18.0 + 20.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{a}" y1="{y}" x2="{b}" y2="{y}" stroke="{c}" stroke-width="2"/><text x="{tx}" y="{ty}">{n}</text>"#,
            a = lx + 10.0,
            b = lx + 40.0,
            c = s.color,
            tx = lx + 48.0,
            ty = y + 4.0,
            n = escape(s.name),
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn tick_label(v: f64, step: f64) -> String {
    let decimals = (-step.log10().floor()).max(0.0) as usize;
    // Avoid printing "-0".
    let v = if v.abs() < 0.5 * step * 1e-6 { 0.0 } else { v };
    format!("{v:.decimals$}")
}
