//! Tiny self-contained SVG writer for the centerline profile plots.
//! One file, no external assets, and fixed two-decimal pixel formatting
//! so identical runs produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use crate::{Error, Result};

pub struct Series {
    pub title: String,
    pub x_label: &'static str,
    pub y_label: &'static str,
    pub numeric: Vec<(f64, f64)>,
    pub analytic: Vec<(f64, f64)>,
}

const PANEL_W: f64 = 360.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_T: f64 = 50.0;
const PANEL_GAP: f64 = 90.0;
const CANVAS_H: f64 = 410.0;

/// Writes the side-by-side profile panels (analytic curve as a line,
/// cell values as circles) for one case.
pub fn write_profile_svg(path: &Path, id: &str, panels: &[Series]) -> Result<()> {
    let canvas_w = MARGIN_L + panels.len() as f64 * (PANEL_W + PANEL_GAP);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{canvas_w:.0}\" height=\"{CANVAS_H:.0}\" \
         viewBox=\"0 0 {canvas_w:.0} {CANVAS_H:.0}\" font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(
        svg,
        "<rect width=\"{canvas_w:.0}\" height=\"{CANVAS_H:.0}\" fill=\"white\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{MARGIN_L}\" y=\"20\" font-size=\"14\">{}</text>",
        escape(id)
    );
    for (k, series) in panels.iter().enumerate() {
        draw_panel(&mut svg, MARGIN_L + k as f64 * (PANEL_W + PANEL_GAP), series);
    }
    svg.push_str("</svg>\n");
    std::fs::write(path, svg).map_err(|e| Error::io(path, e))
}

fn draw_panel(svg: &mut String, x0: f64, series: &Series) {
    let all = series.numeric.iter().chain(series.analytic.iter());
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        if x.is_finite() {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
        }
        if y.is_finite() {
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
    }
    if !(xmin < xmax) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if !(ymin < ymax) {
        ymin -= 0.5;
        ymax += 0.5;
    }
    // breathing room so extrema do not sit on the frame
    let pad = 0.06 * (ymax - ymin);
    ymin -= pad;
    ymax += pad;

    let px = |x: f64| x0 + (x - xmin) / (xmax - xmin) * PANEL_W;
    let py = |y: f64| MARGIN_T + PANEL_H - (y - ymin) / (ymax - ymin) * PANEL_H;

    let _ = writeln!(
        svg,
        "<rect x=\"{x0:.2}\" y=\"{MARGIN_T:.2}\" width=\"{PANEL_W:.2}\" height=\"{PANEL_H:.2}\" \
         fill=\"none\" stroke=\"#444\"/>"
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        x0 + PANEL_W / 2.0,
        MARGIN_T - 10.0,
        escape(&series.title)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\">{}</text>",
        x0 + PANEL_W / 2.0,
        MARGIN_T + PANEL_H + 35.0,
        escape(series.x_label)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
        x0 - 8.0,
        MARGIN_T + 12.0,
        escape(series.y_label)
    );
    // extreme tick labels on both axes
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"10\">{:.3e}</text>",
        x0 - 4.0,
        py(ymax) + 4.0,
        ymax
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-size=\"10\">{:.3e}</text>",
        x0 - 4.0,
        py(ymin) + 4.0,
        ymin
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\">{xmin:.3}</text>",
        px(xmin),
        MARGIN_T + PANEL_H + 16.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-size=\"10\">{xmax:.3}</text>",
        px(xmax),
        MARGIN_T + PANEL_H + 16.0
    );

    let mut points = String::new();
    for &(x, y) in &series.analytic {
        let _ = write!(points, "{:.2},{:.2} ", px(x), py(y));
    }
    let _ = writeln!(
        svg,
        "<polyline points=\"{}\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>",
        points.trim_end()
    );
    for &(x, y) in &series.numeric {
        let _ = writeln!(
            svg,
            "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"none\" stroke=\"#d62728\"/>",
            px(x),
            py(y)
        );
    }
    // legend
    let lx = x0 + 8.0;
    let ly = MARGIN_T + 14.0;
    let _ = writeln!(
        svg,
        "<line x1=\"{lx:.2}\" y1=\"{ly:.2}\" x2=\"{:.2}\" y2=\"{ly:.2}\" stroke=\"#1f77b4\" stroke-width=\"1.5\"/>\
         <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">analytic</text>",
        lx + 22.0,
        lx + 28.0,
        ly + 4.0
    );
    let _ = writeln!(
        svg,
        "<circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"none\" stroke=\"#d62728\"/>\
         <text x=\"{:.2}\" y=\"{:.2}\" font-size=\"10\">computed</text>",
        lx + 11.0,
        ly + 16.0,
        lx + 28.0,
        ly + 20.0
    );
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
