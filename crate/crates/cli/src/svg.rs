//! Static SVG rendering of curves.
//!
//! Curves of dimension ≥ 2 are drawn in their first two coordinates with
//! equal axis scales. One-dimensional curves are drawn against their
//! parameter (or vertex index when there is none).

use std::fmt::Write as _;

use selfcontract::curves::DiscreteCurve;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const PAD: f64 = 40.0;
const INSET_W: f64 = 190.0;
const INSET_H: f64 = 120.0;

#[derive(Default)]
pub struct Plot<'a> {
    pub curve: Option<&'a DiscreteCurve>,
    pub overlay: Option<&'a DiscreteCurve>,
    /// Function values along the curve, drawn as an inset.
    pub values: Option<&'a [f64]>,
    /// Tail-hull mean widths, one per vertex of `curve`.
    pub widths: Option<&'a [f64]>,
}

fn planar(curve: &DiscreteCurve) -> Vec<(f64, f64)> {
    if curve.dim() >= 2 {
        curve.points().iter().map(|p| (p[0], p[1])).collect()
    } else {
        let along: Vec<f64> = match curve.params() {
            Some(ts) => ts.to_vec(),
            None => (0..curve.len()).map(|i| i as f64).collect(),
        };
        curve.points().iter().zip(along).map(|(p, t)| (t, p[0])).collect()
    }
}

struct Frame {
    x0: f64,
    y0: f64,
    sx: f64,
    sy: f64,
    left: f64,
    bottom: f64,
}

impl Frame {
    fn fit(pts: &[(f64, f64)], left: f64, top: f64, w: f64, h: f64, equal: bool) -> Self {
        let (mut xlo, mut xhi, mut ylo, mut yhi) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        for &(x, y) in pts {
            xlo = xlo.min(x);
            xhi = xhi.max(x);
            ylo = ylo.min(y);
            yhi = yhi.max(y);
        }
        let span = |lo: f64, hi: f64| if hi > lo { hi - lo } else { 1.0 };
        let (mut sx, mut sy) = (w / span(xlo, xhi), h / span(ylo, yhi));
        if equal {
            sx = sx.min(sy);
            sy = sx;
        }
        // center the drawing in the box
        let cx = if xhi > xlo { (xlo + xhi) / 2.0 } else { xlo };
        let cy = if yhi > ylo { (ylo + yhi) / 2.0 } else { ylo };
        Frame { x0: cx - w / (2.0 * sx), y0: cy - h / (2.0 * sy), sx, sy, left, bottom: top + h }
    }

    fn map(&self, (x, y): (f64, f64)) -> (f64, f64) {
        (self.left + (x - self.x0) * self.sx, self.bottom - (y - self.y0) * self.sy)
    }
}

fn path(out: &mut String, frame: &Frame, pts: &[(f64, f64)], class: &str, color: &str) {
    let coords: Vec<String> = pts
        .iter()
        .map(|&p| {
            let (x, y) = frame.map(p);
            format!("{x:.2},{y:.2}")
        })
        .collect();
    let _ = writeln!(
        out,
        r#"<polyline class="{class}" fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
        coords.join(" ")
    );
}

fn markers(out: &mut String, frame: &Frame, pts: &[(f64, f64)], class: &str, color: &str, square: bool) {
    for &p in pts {
        let (x, y) = frame.map(p);
        if square {
            let _ = writeln!(
                out,
                r#"<rect class="{class}" x="{:.2}" y="{:.2}" width="6" height="6" fill="{color}"/>"#,
                x - 3.0,
                y - 3.0
            );
        } else {
            let _ = writeln!(out, r#"<circle class="{class}" cx="{x:.2}" cy="{y:.2}" r="3" fill="{color}"/>"#);
        }
    }
}

pub fn render(plot: &Plot) -> String {
    let main = plot.curve.map(planar).unwrap_or_default();
    let extra = plot.overlay.map(planar).unwrap_or_default();
    let equal = plot.curve.or(plot.overlay).is_some_and(|c| c.dim() >= 2);
    let all: Vec<(f64, f64)> = main.iter().chain(&extra).copied().collect();
    let frame = Frame::fit(&all, PAD, PAD, WIDTH - 2.0 * PAD, HEIGHT - 2.0 * PAD, equal);

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    if !main.is_empty() {
        path(&mut out, &frame, &main, "curve", "#1f77b4");
    }
    if !extra.is_empty() {
        path(&mut out, &frame, &extra, "overlay", "#d62728");
    }
    markers(&mut out, &frame, &main, "vertex", "#1f77b4", false);
    markers(&mut out, &frame, &extra, "overlay-vertex", "#d62728", true);

    if let Some(widths) = plot.widths {
        let every = widths.len().div_ceil(20).max(1);
        for (k, (w, &p)) in widths.iter().zip(&main).enumerate() {
            if k % every != 0 {
                continue;
            }
            let (x, y) = frame.map(p);
            let _ = writeln!(
                out,
                r##"<text class="width" x="{:.2}" y="{:.2}" font-size="9" fill="#555">W={w:.3}</text>"##,
                x + 5.0,
                y - 5.0
            );
        }
    }

    if let Some(values) = plot.values.filter(|v| !v.is_empty()) {
        let left = WIDTH - INSET_W - 10.0;
        let top = 10.0;
        let _ = writeln!(
            out,
            r##"<g class="inset"><rect x="{left}" y="{top}" width="{INSET_W}" height="{INSET_H}" fill="white" stroke="#999"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" font-size="10">value by iterate</text>"#,
            left + 6.0,
            top + 12.0
        );
        let pts: Vec<(f64, f64)> = values.iter().enumerate().map(|(k, v)| (k as f64, *v)).collect();
        let inner = Frame::fit(&pts, left + 10.0, top + 18.0, INSET_W - 20.0, INSET_H - 28.0, false);
        path(&mut out, &inner, &pts, "values", "#2ca02c");
        out.push_str("</g>\n");
    }
    out.push_str("</svg>\n");
    out
}
