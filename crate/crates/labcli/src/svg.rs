//! Deterministic layered SVG rendering.
//!
//! One world-to-viewport transform for all layers (y flipped so the plane's
//! +y points up), every coordinate printed with fixed 4-digit precision, no
//! timestamps or randomness: identical input produces identical bytes.

use std::fmt::Write;

use csflab::Point;

const CANVAS_W: f64 = 800.0;
const CANVAS_H: f64 = 600.0;
const PAD: f64 = 24.0;

/// One polyline in world coordinates.
pub struct Layer {
    pub label: String,
    pub color: &'static str,
    pub stroke_width: f64,
    pub dashed: bool,
    pub closed: bool,
    pub points: Vec<Point>,
    /// Whether this layer's extent participates in the viewport fit.
    /// Soliton layers extend far along their asymptotes, so they are drawn
    /// clipped to a viewport framed by the curve layers instead.
    pub frames_view: bool,
}

impl Layer {
    pub fn curve(label: impl Into<String>, color: &'static str, points: Vec<Point>) -> Self {
        Self {
            label: label.into(),
            color,
            stroke_width: 1.6,
            dashed: false,
            closed: false,
            points,
            frames_view: true,
        }
    }

    pub fn soliton(label: impl Into<String>, color: &'static str, points: Vec<Point>) -> Self {
        Self {
            label: label.into(),
            color,
            stroke_width: 1.0,
            dashed: true,
            closed: false,
            points,
            frames_view: false,
        }
    }

    pub fn with_closed(mut self, closed: bool) -> Self {
        self.closed = closed;
        self
    }

    pub fn with_stroke(mut self, width: f64) -> Self {
        self.stroke_width = width;
        self
    }
}

/// Fixed palette: reference/initial curve, flowed curve, then soliton hues.
pub const REFERENCE_COLOR: &str = "#c23b22";
pub const FLOWED_COLOR: &str = "#1f77b4";
pub const EXTRA_COLOR: &str = "#2ca02c";
const SOLITON_COLORS: &[&str] = &["#7f7f7f", "#8c6d31", "#5b7c99", "#7b5b99", "#4d8076"];

pub fn soliton_color(k: usize) -> &'static str {
    SOLITON_COLORS[k % SOLITON_COLORS.len()]
}

struct Mapper {
    scale: f64,
    x0: f64,
    y1: f64,
    ox: f64,
    oy: f64,
}

impl Mapper {
    fn map(&self, p: Point) -> (f64, f64) {
        (
            self.ox + (p.x - self.x0) * self.scale,
            self.oy + (self.y1 - p.y) * self.scale,
        )
    }
}

fn fit(layers: &[Layer]) -> Mapper {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    for layer in layers.iter().filter(|l| l.frames_view) {
        for p in &layer.points {
            lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
        }
    }
    if !(lo.x.is_finite() && hi.x.is_finite() && lo.x < hi.x || lo.y < hi.y) {
        lo = Point::new(-1.0, -1.0);
        hi = Point::new(1.0, 1.0);
    }
    let w = (hi.x - lo.x).max(1e-9);
    let h = (hi.y - lo.y).max(1e-9);
    let scale = ((CANVAS_W - 2.0 * PAD) / w).min((CANVAS_H - 2.0 * PAD) / h);
    // Center the content.
    let ox = 0.5 * (CANVAS_W - w * scale);
    let oy = 0.5 * (CANVAS_H - h * scale);
    Mapper { scale, x0: lo.x, y1: hi.y, ox, oy }
}

/// Render layers to a complete SVG document.
pub fn render(title: &str, layers: &[Layer]) -> String {
    let m = fit(layers);
    let mut out = String::new();
    let _ = writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS_W}" height="{CANVAS_H}" viewBox="0 0 {CANVAS_W} {CANVAS_H}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(
        out,
        r##"<rect width="{CANVAS_W}" height="{CANVAS_H}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        out,
        r#"<g fill="none" stroke-linejoin="round" stroke-linecap="round">"#
    );
    for layer in layers {
        if layer.points.len() < 2 {
            continue;
        }
        let tag = if layer.closed { "polygon" } else { "polyline" };
        let dash = if layer.dashed { r#" stroke-dasharray="5 4""# } else { "" };
        let _ = write!(
            out,
            r#"<{tag} stroke="{}" stroke-width="{:.1}"{dash} points=""#,
            layer.color, layer.stroke_width
        );
        for (i, p) in layer.points.iter().enumerate() {
            let (x, y) = m.map(*p);
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "{x:.4},{y:.4}");
        }
        let _ = writeln!(out, r#""/>"#);
    }
    let _ = writeln!(out, "</g>");

    // Legend: one swatch + label per layer, top-left.
    let _ = writeln!(out, r#"<g font-family="monospace" font-size="12">"#);
    for (i, layer) in layers.iter().enumerate() {
        let y = PAD + 16.0 * i as f64;
        let dash = if layer.dashed { r#" stroke-dasharray="5 4""# } else { "" };
        let _ = writeln!(
            out,
            r#"<line x1="{PAD:.4}" y1="{:.4}" x2="{:.4}" y2="{:.4}" stroke="{}" stroke-width="{:.1}"{dash}/>"#,
            y - 4.0,
            PAD + 26.0,
            y - 4.0,
            layer.color,
            layer.stroke_width,
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.4}" y="{y:.4}" fill="#333333">{}</text>"##,
            PAD + 34.0,
            escape(&layer.label)
        );
    }
    let _ = writeln!(out, "</g>");
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
