//! Minimal deterministic SVG output.

use std::fmt::Write as _;

use crate::geom2d::Vec2;
use crate::hollow::Hollow;
use crate::measure::BinnedMeasure;

/// A drawing mapping a world rectangle onto a fixed-size canvas, y up.
pub struct Svg {
    width: f64,
    height: f64,
    lo: Vec2,
    scale: f64,
    body: String,
}

fn fmt(v: f64) -> String {
    format!("{v:.3}")
}

impl Svg {
    /// Canvas fitting all `points` with a margin.
    pub fn fit<'a>(width: f64, height: f64, points: impl IntoIterator<Item = &'a Vec2>) -> Svg {
        let (mut lo, mut hi) = (
            Vec2::new(f64::INFINITY, f64::INFINITY),
            Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
        );
        for p in points {
            if p.is_finite() {
                lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
                hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
            }
        }
        if !lo.x.is_finite() {
            lo = Vec2::new(0.0, 0.0);
            hi = Vec2::new(1.0, 1.0);
        }
        let span = (hi - lo).x.max((hi - lo).y).max(1e-12);
        let pad = 0.05 * span;
        let lo = lo - Vec2::new(pad, pad);
        let scale = (width / (hi.x - lo.x + pad)).min(height / (hi.y - lo.y + pad));
        Svg {
            width,
            height,
            lo,
            scale,
            body: String::new(),
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        (
            (p.x - self.lo.x) * self.scale,
            self.height - (p.y - self.lo.y) * self.scale,
        )
    }

    pub fn polyline(&mut self, pts: &[Vec2], stroke: &str, width: f64) {
        let mut d = String::new();
        for p in pts.iter().filter(|p| p.is_finite()) {
            let (x, y) = self.map(*p);
            let _ = write!(d, "{},{} ", fmt(x), fmt(y));
        }
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{}"/>"#,
            d.trim_end(),
            fmt(width)
        );
    }

    pub fn circle(&mut self, c: Vec2, r: f64, fill: &str) {
        let (x, y) = self.map(c);
        let _ = writeln!(
            self.body,
            r#"<circle cx="{}" cy="{}" r="{}" fill="{fill}"/>"#,
            fmt(x),
            fmt(y),
            fmt(r)
        );
    }

    pub fn text(&mut self, x: f64, y: f64, s: &str) {
        let _ = writeln!(
            self.body,
            r#"<text x="{}" y="{}" font-family="monospace" font-size="12">{}</text>"#,
            fmt(x),
            fmt(y),
            escape(s)
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body,
            w = fmt(self.width),
            h = fmt(self.height)
        )
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

/// Outline, mirrors and opening of a hollow, with optional particle paths.
pub fn hollow_picture(h: &Hollow, paths: &[Vec<Vec2>], size: f64) -> String {
    let outline = h.outline(64);
    let mut svg = Svg::fit(size, size, outline.iter().chain(paths.iter().flatten()));
    svg.polyline(&outline, "black", 1.5);
    for o in &h.obstacles {
        svg.polyline(&o.polyline(8), "#2a6f97", 1.5);
    }
    svg.polyline(&[h.opening.left, h.opening.right], "#bbbbbb", 1.0);
    for p in paths {
        svg.polyline(p, "#c0392b", 0.8);
    }
    svg.finish()
}

/// Heatmap of a histogram: entry angle left to right, exit angle bottom to top,
/// grey level proportional to the square root of the bin mass.
pub fn heatmap(m: &BinnedMeasure, size: f64, title: &str) -> String {
    let k = m.bins;
    let cell = size / k as f64;
    let peak = m
        .mass
        .iter()
        .cloned()
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut body = String::new();
    for i in 0..k {
        for j in 0..k {
            let v = m.at(i, j);
            if v <= 0.0 {
                continue;
            }
            let level = 255 - ((v / peak).sqrt() * 255.0).round() as u8;
            let _ = writeln!(
                body,
                r#"<rect x="{}" y="{}" width="{}" height="{}" fill="rgb({level},{level},{level})"/>"#,
                fmt(i as f64 * cell),
                fmt(20.0 + (k - 1 - j) as f64 * cell),
                fmt(cell),
                fmt(cell)
            );
        }
    }
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" viewBox=\"0 0 {w} {h}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"2\" y=\"14\" font-family=\"monospace\" font-size=\"12\">{}</text>\n{body}<rect x=\"0\" y=\"20\" width=\"{w}\" height=\"{w}\" fill=\"none\" stroke=\"black\"/>\n</svg>\n",
        escape(title),
        w = fmt(size),
        h = fmt(size + 20.0)
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_text() {
        let pts = [Vec2::new(0.0, 0.0), Vec2::new(1.0, 2.0)];
        let mut s = Svg::fit(100.0, 100.0, &pts);
        s.polyline(&pts, "black", 1.0);
        s.text(1.0, 12.0, "a<b");
        let out = s.finish();
        assert!(out.contains("<polyline") && out.contains("a&lt;b"));
        let mut t = Svg::fit(100.0, 100.0, &pts);
        t.polyline(&pts, "black", 1.0);
        t.text(1.0, 12.0, "a<b");
        assert_eq!(out, t.finish());
    }
}
