use std::fmt::Write;

use crate::error::{Error, Result};
use crate::loopcore::Loop;

/// Points sampled along the loop for every render.
pub const SVG_SAMPLES: usize = 4096;
const MARGIN: f64 = 0.05;

/// Image of a planar loop: one polyline through `SVG_SAMPLES` uniform
/// samples, the basepoint marked. `y` points up.
pub fn render_svg(gamma: &Loop) -> Result<String> {
    if gamma.dim() != 2 {
        return Err(Error::Domain(format!("svg needs a planar loop, got dimension {}", gamma.dim())));
    }
    let pts: Vec<Vec<f64>> = (0..SVG_SAMPLES)
        .map(|k| gamma.eval(k as f64 / (SVG_SAMPLES - 1) as f64))
        .collect::<Result<_>>()?;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for p in &pts {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    let span = (x1 - x0).max(y1 - y0);
    let span = if span > 0.0 { span } else { 1.0 };
    let pad = MARGIN * span;
    let (vx, vy) = (x0 - pad, -(y1 + pad));
    let (vw, vh) = ((x1 - x0) + 2.0 * pad, (y1 - y0) + 2.0 * pad);
    let stroke = span / 400.0;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{vx} {vy} {vw} {vh}" width="800" height="{}">"#,
        (800.0 * vh / vw).round().max(1.0)
    );
    if let Some(label) = gamma.label() {
        let _ = writeln!(s, "  <title>{}</title>", label.replace('&', "&amp;").replace('<', "&lt;"));
    }
    let mut poly = String::new();
    for (k, p) in pts.iter().enumerate() {
        if k > 0 {
            poly.push(' ');
        }
        let _ = write!(poly, "{},{}", p[0], -p[1]);
    }
    let _ = writeln!(
        s,
        r#"  <polyline fill="none" stroke="black" stroke-width="{stroke}" stroke-linejoin="round" points="{poly}"/>"#
    );
    let b = gamma.basepoint();
    let _ = writeln!(
        s,
        r#"  <circle cx="{}" cy="{}" r="{}" fill="red"/>"#,
        b[0],
        -b[1],
        4.0 * stroke
    );
    s.push_str("</svg>\n");
    Ok(s)
}
