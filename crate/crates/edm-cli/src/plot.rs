//! Planar SVG of an estimate against the instance ground truth: the estimate
//! is Procrustes-aligned onto the truth, deviations drawn as segments.

use std::fmt::Write as _;

use edm_core::error::{Error, Result};
use edm_core::instances::Instance;
use edm_core::linalg::procrustes_rmsd;
use edm_core::realization::Realization;

const CANVAS: f64 = 640.0;
const MARGIN: f64 = 40.0;
/// Segments shorter than this many canvas units are points, not deviations.
const MIN_SEGMENT: f64 = 1e-9;

/// Renders a self-contained SVG 1.1 document. Identical inputs give
/// byte-identical output.
pub fn render(inst: &Instance, p: &Realization) -> Result<String> {
    let truth = inst.edm.ground_truth().ok_or(Error::NoGroundTruth)?;
    if p.n() != truth.n() || p.dim() != truth.dim() {
        return Err(Error::dims(format!(
            "estimate {}x{} vs truth {}x{}",
            p.n(),
            p.dim(),
            truth.n(),
            truth.dim()
        )));
    }
    if p.dim() != 2 {
        return Err(Error::Validation(format!(
            "plot wants planar realizations, got dimension {}",
            p.dim()
        )));
    }

    let truth_c = truth.centered();
    let est_c = p.centered();
    let (_, u) = procrustes_rmsd(est_c.points(), truth_c.points())?;
    let aligned = est_c.points() * u;
    let truth_pts = truth_c.points();

    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for pts in [truth_pts, &aligned] {
        for row in 0..pts.nrows() {
            for (axis, lo) in lo.iter_mut().enumerate() {
                *lo = lo.min(pts[(row, axis)]);
            }
            for (axis, hi) in hi.iter_mut().enumerate() {
                *hi = hi.max(pts[(row, axis)]);
            }
        }
    }
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(1e-12);
    let scale = (CANVAS - 2.0 * MARGIN) / side;
    // Center the square viewport on the data box.
    let off = [
        MARGIN + 0.5 * (side - (hi[0] - lo[0])) * scale,
        MARGIN + 0.5 * (side - (hi[1] - lo[1])) * scale,
    ];
    let to_canvas = |x: f64, y: f64| -> (f64, f64) {
        (
            off[0] + (x - lo[0]) * scale,
            CANVAS - (off[1] + (y - lo[1]) * scale),
        )
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"640\" height=\"640\" viewBox=\"0 0 640 640\">"
    );
    let _ = writeln!(svg, "<rect width=\"640\" height=\"640\" fill=\"#ffffff\"/>");
    for i in 0..truth_pts.nrows() {
        let (tx, ty) = to_canvas(truth_pts[(i, 0)], truth_pts[(i, 1)]);
        let (ex, ey) = to_canvas(aligned[(i, 0)], aligned[(i, 1)]);
        if (ex - tx).hypot(ey - ty) < MIN_SEGMENT {
            continue;
        }
        let _ = writeln!(
            svg,
            "<line x1=\"{tx:.3}\" y1=\"{ty:.3}\" x2=\"{ex:.3}\" y2=\"{ey:.3}\" \
             stroke=\"#999999\" stroke-width=\"1\"/>"
        );
    }
    for i in 0..truth_pts.nrows() {
        let (tx, ty) = to_canvas(truth_pts[(i, 0)], truth_pts[(i, 1)]);
        let _ = writeln!(
            svg,
            "<circle cx=\"{tx:.3}\" cy=\"{ty:.3}\" r=\"4\" fill=\"#2c6fbb\"/>"
        );
    }
    for i in 0..aligned.nrows() {
        let (ex, ey) = to_canvas(aligned[(i, 0)], aligned[(i, 1)]);
        let _ = writeln!(
            svg,
            "<circle cx=\"{ex:.3}\" cy=\"{ey:.3}\" r=\"2.6\" fill=\"#cc3b3b\"/>"
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
