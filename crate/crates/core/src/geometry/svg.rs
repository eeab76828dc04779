//! Static SVG figures of planar scenes.

use std::fmt::Write;

use super::{Scene, overlay};
use crate::error::{Error, Result};
use crate::wells::Phase;

/// Fill of austenite cells.
pub const AUSTENITE_COLOR: &str = "#f0f0f0";

/// Fill of martensite well `i` is `WELL_COLORS[i % 8]`.
pub const WELL_COLORS: [&str; 8] =
    ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub fn phase_color(phase: Phase) -> &'static str {
    match phase {
        Phase::Austenite => AUSTENITE_COLOR,
        Phase::Well(i) => WELL_COLORS[i % WELL_COLORS.len()],
    }
}

fn pt(out: &mut String, p: [f64; 3]) {
    // y is flipped so the figure reads with x2 pointing up.
    let _ = write!(out, "{:.6},{:.6} ", p[0], 0.0 - p[1]);
}

/// Cells filled by phase, the jump set of `χ` stroked in black and the
/// inclusion boundary dashed.
pub fn scene_svg(scene: &Scene) -> Result<String> {
    if scene.n != 2 {
        return Err(Error::UnsupportedRender(format!("SVG export is 2D only, scene has n = {}", scene.n)));
    }
    let (lo, hi) = scene.domain.bbox();
    let pad = 0.02 * scene.scale();
    let (x0, y0) = (lo[0] - pad, -hi[1] - pad);
    let (w, h) = (hi[0] - lo[0] + 2.0 * pad, hi[1] - lo[1] + 2.0 * pad);
    let px = 800.0;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{px:.0}" height="{:.0}" viewBox="{x0:.6} {y0:.6} {w:.6} {h:.6}">"#,
        (px * h / w).ceil()
    );
    out.push_str("<g stroke=\"none\">\n");
    for c in &scene.cells {
        out.push_str("<polygon points=\"");
        for &p in c.poly.vertices() {
            pt(&mut out, p);
        }
        let _ = writeln!(out, "\" fill=\"{}\"/>", phase_color(c.phase));
    }
    out.push_str("</g>\n<g stroke=\"#000\" stroke-width=\"1\" vector-effect=\"non-scaling-stroke\" fill=\"none\">\n");
    let ov = overlay(scene);
    let segment = |out: &mut String, v: &[[f64; 3]]| {
        if v.len() >= 2 {
            let _ = writeln!(
                out,
                r#"<line x1="{:.6}" y1="{:.6}" x2="{:.6}" y2="{:.6}" vector-effect="non-scaling-stroke"/>"#,
                v[0][0], 0.0 - v[0][1], v[1][0], 0.0 - v[1][1]
            );
        }
    };
    for piece in &ov.internal {
        if scene.cells[piece.minus].phase != scene.cells[piece.plus].phase {
            segment(&mut out, &piece.vertices);
        }
    }
    for piece in &ov.boundary {
        if scene.cells[piece.cell].phase.is_martensite() {
            segment(&mut out, &piece.vertices);
        }
    }
    out.push_str("</g>\n<polygon fill=\"none\" stroke=\"#555\" stroke-dasharray=\"4 3\" vector-effect=\"non-scaling-stroke\" points=\"");
    for &p in scene.domain.vertices() {
        pt(&mut out, p);
    }
    out.push_str("\"/>\n</svg>\n");
    Ok(out)
}
