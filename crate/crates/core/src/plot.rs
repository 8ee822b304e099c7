//! Minimal SVG figures: labeled 2-d scatter projections and pair-classifier
//! decision regions on the (P, H) plane.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::svm::PairClassifier;

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"];
const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 360.0;
const MARGIN: f64 = 40.0;

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        MARGIN + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - 2.0 * MARGIN)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - 2.0 * MARGIN)
    }

    fn open(&self, out: &mut String, title: &str, xlabel: &str, ylabel: &str) {
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
        )
        .unwrap();
        writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(out, r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{title}</text>"#, WIDTH / 2.0)
            .unwrap();
        let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
        writeln!(
            out,
            r#"<rect x="{l}" y="{t}" width="{:.1}" height="{:.1}" fill="none" stroke="black"/>"#,
            r - l,
            b - t
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{xlabel}</text>"#,
            WIDTH / 2.0,
            HEIGHT - 8.0
        )
        .unwrap();
        writeln!(
            out,
            r#"<text x="12" y="{:.1}" text-anchor="middle" font-size="12" transform="rotate(-90 12 {:.1})">{ylabel}</text>"#,
            HEIGHT / 2.0,
            HEIGHT / 2.0
        )
        .unwrap();
        for (v, anchor, x, y) in [(self.x0, "start", l, b + 14.0), (self.x1, "end", r, b + 14.0)] {
            writeln!(out, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="{anchor}" font-size="10">{v:.2}</text>"#)
                .unwrap();
        }
        for (v, y) in [(self.y0, b), (self.y1, t + 8.0)] {
            writeln!(out, r#"<text x="{:.1}" y="{y:.1}" text-anchor="end" font-size="10">{v:.2}</text>"#, l - 4.0)
                .unwrap();
        }
    }
}

/// Scatter of features `dims.0` (horizontal) and `dims.1` (vertical),
/// colored by class when labels are present.
pub fn scatter_svg(data: &Dataset, dims: (usize, usize)) -> Result<String> {
    let d = data.d();
    if dims.0 >= d || dims.1 >= d {
        return Err(Error::InvalidArgument(format!("plot dimensions {dims:?} out of range for {d} features")));
    }
    let x = data.features().column(dims.0);
    let y = data.features().column(dims.1);
    let pad = |lo: f64, hi: f64| {
        let span = (hi - lo).max(1e-9);
        (lo - 0.05 * span, hi + 0.05 * span)
    };
    let (x0, x1) = pad(x.min(), x.max());
    let (y0, y1) = pad(y.min(), y.max());
    let frame = Frame { x0, x1, y0, y1 };
    let mut out = String::new();
    frame.open(&mut out, data.name(), &format!("x{}", dims.0 + 1), &format!("x{}", dims.1 + 1));
    for i in 0..data.n() {
        let color = data.labels().map_or("#333333", |l| PALETTE[l[i] % PALETTE.len()]);
        writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, frame.px(x[i]), frame.py(y[i]))
            .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn plot_scatter(data: &Dataset, dims: (usize, usize), out: impl AsRef<Path>) -> Result<()> {
    write(out.as_ref(), scatter_svg(data, dims)?)
}

/// Grid cells per axis for the decision-region raster.
pub const BOUNDARY_GRID: (usize, usize) = (80, 40);

/// Decision regions of `model` over P ∈ [−1, 1] (horizontal) and
/// H ∈ [0, 1] (vertical), overlaid with the training pairs.
pub fn boundary_svg(model: &PairClassifier, pairs: &[[f64; 2]], labels: &[u8]) -> String {
    let frame = Frame { x0: -1.0, x1: 1.0, y0: 0.0, y1: 1.0 };
    let mut out = String::new();
    frame.open(&mut out, "pair classifier decision regions", "P (mean Silhouette)", "H (co-association)");
    let (gx, gy) = BOUNDARY_GRID;
    let (cw, ch) = (2.0 / gx as f64, 1.0 / gy as f64);
    for a in 0..gx {
        for b in 0..gy {
            let (p, h) = (-1.0 + (a as f64 + 0.5) * cw, (b as f64 + 0.5) * ch);
            let class = model.predict(&[[p, h]])[0];
            let fill = if class == 1 { "#fde0c5" } else { "#d6e6f5" };
            let (left, top) = (frame.px(p - cw / 2.0), frame.py(h + ch / 2.0));
            let (w, hh) = (frame.px(p + cw / 2.0) - left, frame.py(h - ch / 2.0) - top);
            writeln!(out, r#"<rect x="{left:.2}" y="{top:.2}" width="{w:.2}" height="{hh:.2}" fill="{fill}"/>"#)
                .unwrap();
        }
    }
    for (x, &l) in pairs.iter().zip(labels) {
        let color = if l == 1 { PALETTE[3] } else { PALETTE[0] };
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="{color}" fill-opacity="0.6"/>"#,
            frame.px(x[0]),
            frame.py(x[1])
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}

pub fn plot_boundary(model: &PairClassifier, pairs: &[[f64; 2]], labels: &[u8], out: impl AsRef<Path>) -> Result<()> {
    write(out.as_ref(), boundary_svg(model, pairs, labels))
}

fn write(path: &Path, body: String) -> Result<()> {
    fs::write(path, body).map_err(|e| Error::io(path, e))
}
