//! SVG scatter plots of projections and step histograms of cosine values.
//!
//! Output is plain SVG 1.1 built with `format!`; identical inputs give
//! identical bytes.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::eval::HistogramSpec;
use crate::pairdata::Label;
use crate::reduce::Projection;
use crate::tsv::write_atomic;

#[derive(Debug, Clone, PartialEq)]
pub struct PlotStyle {
    pub color_map: BTreeMap<Label, String>,
    pub point_radius: f64,
    pub width: u32,
    pub height: u32,
    pub opacity: f64,
    pub legend: bool,
}

impl Default for PlotStyle {
    fn default() -> Self {
        let color_map = [
            (Label::Antonym, "#1f77b4"),
            (Label::ShuffledAntonym, "#2ca02c"),
            (Label::Synonym, "#d62728"),
            (Label::ShuffledSynonym, "#ff7f0e"),
        ]
        .into_iter()
        .map(|(l, c)| (l, c.to_owned()))
        .collect();
        PlotStyle {
            color_map,
            point_radius: 2.0,
            width: 640,
            height: 560,
            opacity: 0.5,
            legend: true,
        }
    }
}

impl PlotStyle {
    fn color(&self, label: Label) -> &str {
        self.color_map.get(&label).map_or("#000000", String::as_str)
    }
}

const MARGIN_LEFT: f64 = 56.0;
const MARGIN_RIGHT: f64 = 16.0;
const MARGIN_TOP: f64 = 28.0;
const MARGIN_BOTTOM: f64 = 40.0;
const LEGEND_HEIGHT: f64 = 24.0;
const TICKS: usize = 5;

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

/// Affine map from a data box to a pixel box (y flipped).
#[derive(Debug, Clone, Copy)]
struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    left: f64,
    top: f64,
    w: f64,
    h: f64,
}

impl Frame {
    fn px(&self, x: f64) -> f64 {
        self.left + (x - self.x0) / (self.x1 - self.x0) * self.w
    }

    fn py(&self, y: f64) -> f64 {
        self.top + (self.y1 - y) / (self.y1 - self.y0) * self.h
    }
}

/// Bounding interval widened by 5% on each side; a degenerate interval is
/// widened to unit half-width around its value.
fn padded(lo: f64, hi: f64) -> (f64, f64) {
    if !(lo.is_finite() && hi.is_finite()) {
        return (-1.0, 1.0);
    }
    if hi - lo <= 0.0 {
        return (lo - 1.0, hi + 1.0);
    }
    let m = 0.05 * (hi - lo);
    (lo - m, hi + m)
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let _ = writeln!(
        out,
        r##"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" fill="none" stroke="#444444" stroke-width="1"/>"##,
        f.left, f.top, f.w, f.h
    );
    let mut ticks = String::new();
    for i in 0..TICKS {
        let t = i as f64 / (TICKS - 1) as f64;
        let xv = f.x0 + t * (f.x1 - f.x0);
        let yv = f.y0 + t * (f.y1 - f.y0);
        let _ = write!(
            ticks,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text>"#,
            f.px(xv),
            f.top + f.h + 14.0,
            fmt_tick(xv)
        );
        let _ = write!(
            ticks,
            r#"<text x="{:.3}" y="{:.3}" text-anchor="end">{}</text>"#,
            f.left - 4.0,
            f.py(yv) + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        out,
        r##"<g font-family="sans-serif" font-size="10" fill="#444444">{ticks}<text x="{:.3}" y="{:.3}" text-anchor="middle">{}</text><text x="{:.3}" y="{:.3}" text-anchor="middle" transform="rotate(-90 {:.3} {:.3})">{}</text></g>"##,
        f.left + f.w / 2.0,
        f.top + f.h + 30.0,
        escape(x_label),
        f.left - 40.0,
        f.top + f.h / 2.0,
        f.left - 40.0,
        f.top + f.h / 2.0,
        escape(y_label)
    );
}

fn fmt_tick(v: f64) -> String {
    let s = format!("{v:.2}");
    if s == "-0.00" {
        "0.00".into()
    } else {
        s
    }
}

fn legend(out: &mut String, style: &PlotStyle, x: f64, y: f64) {
    let mut cx = x;
    let _ = write!(out, r#"<g font-family="sans-serif" font-size="11">"#);
    for label in Label::ALL {
        let _ = write!(
            out,
            r##"<circle cx="{:.3}" cy="{:.3}" r="5" fill="{}"/><text x="{:.3}" y="{:.3}" fill="#222222">{}</text>"##,
            cx,
            y,
            style.color(label),
            cx + 9.0,
            y + 4.0,
            label.as_str().replace('_', " ")
        );
        cx += 140.0;
    }
    let _ = writeln!(out, "</g>");
}

fn header(out: &mut String, w: f64, h: f64) {
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w}" height="{h}" viewBox="0 0 {w} {h}">
<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>"#
    );
}

fn check_finite(proj: &Projection) -> Result<()> {
    if proj.coords.cols() != 2 {
        return Err(Error::Param(format!("cannot plot {} columns", proj.coords.cols())));
    }
    if !proj.coords.is_finite() {
        return Err(Error::Numeric("projection has non-finite coordinates".into()));
    }
    Ok(())
}

/// Draws the points of `proj` into the pixel box, with axes and an optional
/// caption above the box.
fn scatter_panel(out: &mut String, proj: &Projection, style: &PlotStyle, left: f64, top: f64, w: f64, h: f64, caption: Option<&str>) {
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for r in proj.coords.iter_rows() {
        xl = xl.min(r[0]);
        xh = xh.max(r[0]);
        yl = yl.min(r[1]);
        yh = yh.max(r[1]);
    }
    let (x0, x1) = padded(xl, xh);
    let (y0, y1) = padded(yl, yh);
    let f = Frame {
        x0,
        x1,
        y0,
        y1,
        left: left + MARGIN_LEFT,
        top: top + MARGIN_TOP,
        w: w - MARGIN_LEFT - MARGIN_RIGHT,
        h: h - MARGIN_TOP - MARGIN_BOTTOM,
    };
    if let Some(c) = caption {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="{:.3}" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            f.left + f.w / 2.0,
            top + 18.0,
            escape(c)
        );
    }
    axes(out, &f, "x", "y");
    for (r, &label) in proj.coords.iter_rows().zip(&proj.labels) {
        let _ = writeln!(
            out,
            r#"<circle cx="{:.3}" cy="{:.3}" r="{}" fill="{}" fill-opacity="{}"/>"#,
            f.px(r[0]),
            f.py(r[1]),
            style.point_radius,
            style.color(label),
            style.opacity
        );
    }
}

/// One `<circle>` per point, axes fitted to the bounding box plus 5%.
pub fn render_scatter(proj: &Projection, style: &PlotStyle, title: Option<&str>) -> Result<String> {
    check_finite(proj)?;
    let (w, h) = (style.width as f64, style.height as f64);
    let legend_h = if style.legend { LEGEND_HEIGHT } else { 0.0 };
    let mut out = String::new();
    header(&mut out, w, h);
    scatter_panel(&mut out, proj, style, 0.0, 0.0, w, h - legend_h, title);
    if style.legend {
        legend(&mut out, style, MARGIN_LEFT, h - legend_h / 2.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn scatter_svg(proj: &Projection, style: &PlotStyle, out: &Path) -> Result<()> {
    write_atomic(out, render_scatter(proj, style, None)?.as_bytes())
}

/// Panels laid out row by row, each `style.width x style.height`; cells
/// past the end of `panels` stay blank. One legend sits under the grid.
pub fn render_grid(panels: &[(Projection, String)], rows: usize, cols: usize, style: &PlotStyle) -> Result<String> {
    if rows * cols < panels.len() {
        return Err(Error::Param(format!(
            "{} panels do not fit a {rows}x{cols} grid",
            panels.len()
        )));
    }
    for (p, _) in panels {
        check_finite(p)?;
    }
    let (pw, ph) = (style.width as f64, style.height as f64);
    let legend_h = if style.legend { LEGEND_HEIGHT } else { 0.0 };
    let (w, h) = (pw * cols as f64, ph * rows as f64 + legend_h);
    let mut out = String::new();
    header(&mut out, w, h);
    for (i, (p, caption)) in panels.iter().enumerate() {
        let (r, c) = (i / cols, i % cols);
        scatter_panel(&mut out, p, style, c as f64 * pw, r as f64 * ph, pw, ph, Some(caption));
    }
    if style.legend {
        legend(&mut out, style, MARGIN_LEFT, h - legend_h / 2.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn grid_svg(panels: &[(Projection, String)], rows: usize, cols: usize, style: &PlotStyle, out: &Path) -> Result<()> {
    write_atomic(out, render_grid(panels, rows, cols, style)?.as_bytes())
}

/// Overlaid step lines, one `<path>` per label, on shared axes.
pub fn render_histogram(spec: &HistogramSpec, style: &PlotStyle, title: Option<&str>) -> Result<String> {
    let nb = spec.bin_edges.len().saturating_sub(1);
    if nb == 0 || spec.bin_edges.windows(2).any(|e| e[1] <= e[0]) {
        return Err(Error::Param("histogram edges must be strictly increasing".into()));
    }
    if spec.counts.values().any(|c| c.len() != nb) {
        return Err(Error::Param("histogram counts do not match the bins".into()));
    }
    let (w, h) = (style.width as f64, style.height as f64);
    let legend_h = if style.legend { LEGEND_HEIGHT } else { 0.0 };
    let ymax = spec.counts.values().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let f = Frame {
        x0: spec.bin_edges[0],
        x1: spec.bin_edges[nb],
        y0: 0.0,
        y1: ymax * 1.05,
        left: MARGIN_LEFT,
        top: MARGIN_TOP,
        w: w - MARGIN_LEFT - MARGIN_RIGHT,
        h: h - legend_h - MARGIN_TOP - MARGIN_BOTTOM,
    };
    let mut out = String::new();
    header(&mut out, w, h);
    if let Some(t) = title {
        let _ = writeln!(
            out,
            r#"<text x="{:.3}" y="18" font-family="sans-serif" font-size="12" text-anchor="middle">{}</text>"#,
            f.left + f.w / 2.0,
            escape(t)
        );
    }
    axes(&mut out, &f, "cosine similarity", "pairs");
    for (&label, counts) in &spec.counts {
        let mut d = format!("M {:.3} {:.3}", f.px(spec.bin_edges[0]), f.py(0.0));
        for (b, &c) in counts.iter().enumerate() {
            let _ = write!(
                d,
                " V {:.3} H {:.3}",
                f.py(c as f64),
                f.px(spec.bin_edges[b + 1])
            );
        }
        let _ = write!(d, " V {:.3}", f.py(0.0));
        let _ = writeln!(
            out,
            r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.5"/>"#,
            style.color(label)
        );
    }
    if style.legend {
        legend(&mut out, style, MARGIN_LEFT, h - legend_h / 2.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}

pub fn histogram_svg(spec: &HistogramSpec, style: &PlotStyle, out: &Path) -> Result<()> {
    write_atomic(out, render_histogram(spec, style, None)?.as_bytes())
}
