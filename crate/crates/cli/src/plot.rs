//! Minimal SVG 1.1 charts with plain-text TSV sidecars.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 24.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 56.0;

const PALETTE: [&str; 4] = ["#1f4e79", "#c0392b", "#27864a", "#8e44ad"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Linear,
    Log,
}

#[derive(Debug, Clone)]
pub struct Axis {
    pub label: String,
    pub scale: Scale,
}

#[derive(Debug, Clone)]
pub enum Layer {
    Markers { name: String, points: Vec<(f64, f64)> },
    Line { name: String, points: Vec<(f64, f64)>, width: f64 },
    /// `(x_lo, x_hi, height)` rectangles rising from zero.
    Bars { name: String, bars: Vec<(f64, f64, f64)> },
    /// Vertical marker across the plot area.
    Rule { name: String, x: f64 },
}

#[derive(Debug, Clone)]
pub struct Figure {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub layers: Vec<Layer>,
    /// Free text printed under the legend.
    pub notes: Vec<String>,
}

struct Mapping {
    scale: Scale,
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Mapping {
    fn t(&self, v: f64) -> f64 {
        match self.scale {
            Scale::Linear => v,
            Scale::Log => v.ln(),
        }
    }

    fn px(&self, v: f64) -> f64 {
        let (a, b) = (self.t(self.lo), self.t(self.hi));
        self.px_lo + (self.t(v) - a) / (b - a) * (self.px_hi - self.px_lo)
    }

    fn visible(&self, v: f64) -> bool {
        v.is_finite() && (self.scale == Scale::Linear || v > 0.0)
    }
}

fn nice_step(span: f64) -> f64 {
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let f = raw / mag;
    let m = if f <= 1.0 {
        1.0
    } else if f <= 2.0 {
        2.0
    } else if f <= 5.0 {
        5.0
    } else {
        10.0
    };
    m * mag
}

/// Axis limits and tick positions for the values in `vals`.
fn limits(scale: Scale, vals: &[f64], include_zero: bool) -> (f64, f64, Vec<f64>) {
    match scale {
        Scale::Linear => {
            let mut lo = vals.iter().copied().fold(f64::INFINITY, f64::min);
            let mut hi = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                (lo, hi) = (0.0, 1.0);
            }
            if include_zero {
                lo = lo.min(0.0);
                hi = hi.max(0.0);
            }
            if hi - lo <= 0.0 {
                let pad = if hi == 0.0 { 1.0 } else { hi.abs() * 0.5 };
                (lo, hi) = (lo - pad, hi + pad);
            }
            let step = nice_step(hi - lo);
            let lo = (lo / step).floor() * step;
            let hi = (hi / step).ceil() * step;
            let count = ((hi - lo) / step).round() as i64;
            let ticks = (0..=count).map(|i| lo + i as f64 * step).collect();
            (lo, hi, ticks)
        }
        Scale::Log => {
            let pos: Vec<f64> = vals.iter().copied().filter(|v| *v > 0.0 && v.is_finite()).collect();
            let lo = pos.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = pos.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (mut d_lo, mut d_hi) = if lo.is_finite() {
                (lo.log10().floor() as i32, hi.log10().ceil() as i32)
            } else {
                (0, 1)
            };
            if d_hi <= d_lo {
                d_hi = d_lo + 1;
            }
            if d_lo >= d_hi {
                d_lo = d_hi - 1;
            }
            let ticks = (d_lo..=d_hi).map(|d| 10f64.powi(d)).collect();
            (10f64.powi(d_lo), 10f64.powi(d_hi), ticks)
        }
    }
}

fn tick_label(scale: Scale, v: f64) -> String {
    match scale {
        Scale::Log => {
            let d = v.log10().round() as i32;
            if (0..=6).contains(&d) {
                format!("{}", 10u64.pow(d as u32))
            } else {
                format!("1e{d}")
            }
        }
        Scale::Linear => {
            if v == 0.0 {
                "0".to_string()
            } else if v.abs() >= 1e-3 && v.abs() < 1e6 {
                let s = format!("{v:.6}");
                s.trim_end_matches('0').trim_end_matches('.').to_string()
            } else {
                format!("{v:.1e}")
            }
        }
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn layer_values(layers: &[Layer]) -> (Vec<f64>, Vec<f64>) {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for l in layers {
        match l {
            Layer::Markers { points, .. } | Layer::Line { points, .. } => {
                for &(x, y) in points {
                    xs.push(x);
                    ys.push(y);
                }
            }
            Layer::Bars { bars, .. } => {
                for &(a, b, h) in bars {
                    xs.push(a);
                    xs.push(b);
                    ys.push(h);
                }
            }
            Layer::Rule { x, .. } => xs.push(*x),
        }
    }
    (xs, ys)
}

pub fn render_svg(fig: &Figure) -> String {
    let (xs, ys) = layer_values(&fig.layers);
    let has_bars = fig.layers.iter().any(|l| matches!(l, Layer::Bars { .. }));
    let (x_lo, x_hi, x_ticks) = limits(fig.x.scale, &xs, false);
    let (y_lo, y_hi, y_ticks) = limits(fig.y.scale, &ys, has_bars && fig.y.scale == Scale::Linear);
    let mx = Mapping { scale: fig.x.scale, lo: x_lo, hi: x_hi, px_lo: LEFT, px_hi: WIDTH - RIGHT };
    let my = Mapping { scale: fig.y.scale, lo: y_lo, hi: y_hi, px_lo: HEIGHT - BOTTOM, px_hi: TOP };

    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&fig.title));

    let _ = writeln!(s, r##"<g stroke="#dddddd" stroke-width="1">"##);
    for &t in &x_ticks {
        let px = mx.px(t);
        let _ = writeln!(s, r#"<line x1="{px:.2}" y1="{TOP:.2}" x2="{px:.2}" y2="{:.2}"/>"#, HEIGHT - BOTTOM);
    }
    for &t in &y_ticks {
        let py = my.px(t);
        let _ = writeln!(s, r#"<line x1="{LEFT:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}"/>"#, WIDTH - RIGHT);
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g font-size="11">"#);
    for &t in &x_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
            mx.px(t),
            HEIGHT - BOTTOM + 16.0,
            tick_label(fig.x.scale, t)
        );
    }
    for &t in &y_ticks {
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            my.px(t) + 4.0,
            tick_label(fig.y.scale, t)
        );
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
        (LEFT + WIDTH - RIGHT) / 2.0,
        HEIGHT - 14.0,
        escape(&fig.x.label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">{}</text>"#,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        (TOP + HEIGHT - BOTTOM) / 2.0,
        escape(&fig.y.label)
    );

    let mut legend = Vec::new();
    for (i, layer) in fig.layers.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        match layer {
            Layer::Bars { name, bars } => {
                let _ = writeln!(s, r##"<g fill="{colour}" fill-opacity="0.6" stroke="#333333" stroke-width="0.5">"##);
                let base = if fig.y.scale == Scale::Log { y_lo } else { 0f64.clamp(y_lo, y_hi) };
                for &(a, b, h) in bars {
                    if !(mx.visible(a) && mx.visible(b) && my.visible(h)) || h <= base {
                        continue;
                    }
                    let (x0, x1) = (mx.px(a), mx.px(b));
                    let (y0, y1) = (my.px(h), my.px(base));
                    let _ = writeln!(
                        s,
                        r#"<rect x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}"/>"#,
                        (x1 - x0).max(0.5),
                        y1 - y0
                    );
                }
                let _ = writeln!(s, "</g>");
                legend.push((name.clone(), colour, "bar"));
            }
            Layer::Markers { name, points } => {
                let _ = writeln!(s, r#"<g fill="{colour}">"#);
                for &(x, y) in points {
                    if mx.visible(x) && my.visible(y) {
                        let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2"/>"#, mx.px(x), my.px(y));
                    }
                }
                let _ = writeln!(s, "</g>");
                legend.push((name.clone(), colour, "marker"));
            }
            Layer::Line { name, points, width } => {
                let mut d = String::new();
                let mut pen_down = false;
                for &(x, y) in points {
                    if mx.visible(x) && my.visible(y) {
                        let _ = write!(d, "{}{:.2},{:.2} ", if pen_down { "L" } else { "M" }, mx.px(x), my.px(y));
                        pen_down = true;
                    } else {
                        pen_down = false;
                    }
                }
                let _ = writeln!(
                    s,
                    r#"<path d="{}" fill="none" stroke="{colour}" stroke-width="{width}"/>"#,
                    d.trim_end()
                );
                legend.push((name.clone(), colour, "line"));
            }
            Layer::Rule { name, x } => {
                if mx.visible(*x) {
                    let px = mx.px(*x);
                    let _ = writeln!(
                        s,
                        r#"<line x1="{px:.2}" y1="{TOP:.2}" x2="{px:.2}" y2="{:.2}" stroke="{colour}" stroke-dasharray="4 3"/>"#,
                        HEIGHT - BOTTOM
                    );
                    let _ = writeln!(
                        s,
                        r#"<text x="{:.2}" y="{:.2}" font-size="10" fill="{colour}">{}</text>"#,
                        px + 3.0,
                        TOP + 12.0,
                        escape(name)
                    );
                }
            }
        }
    }

    let _ = writeln!(s, r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>"##, WIDTH - RIGHT - LEFT, HEIGHT - BOTTOM - TOP);

    let lx = WIDTH - RIGHT - 180.0;
    let mut ly = TOP + 16.0;
    for (name, colour, kind) in &legend {
        match *kind {
            "marker" => {
                let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"/>"#, lx + 8.0, ly - 4.0);
            }
            "bar" => {
                let _ = writeln!(s, r#"<rect x="{:.2}" y="{:.2}" width="12" height="8" fill="{colour}" fill-opacity="0.6"/>"#, lx + 2.0, ly - 8.0);
            }
            _ => {
                let _ = writeln!(
                    s,
                    r#"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{colour}" stroke-width="2"/>"#,
                    lx,
                    ly - 4.0,
                    lx + 16.0,
                    ly - 4.0
                );
            }
        }
        let _ = writeln!(s, r#"<text x="{:.2}" y="{ly:.2}">{}</text>"#, lx + 22.0, escape(name));
        ly += 16.0;
    }
    for note in &fig.notes {
        let _ = writeln!(s, r#"<text x="{lx:.2}" y="{ly:.2}" font-size="10">{}</text>"#, escape(note));
        ly += 13.0;
    }
    s.push_str("</svg>\n");
    s
}

/// Tab-separated table with a header row.
pub fn tsv<R: AsRef<[String]>>(header: &[&str], rows: &[R]) -> String {
    let mut s = header.join("\t");
    s.push('\n');
    for row in rows {
        s.push_str(&row.as_ref().join("\t"));
        s.push('\n');
    }
    s
}
