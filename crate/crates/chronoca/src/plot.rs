//! Static SVG emitters: the factor-plane scatter and the dendrogram.
//!
//! Both emitters are deterministic (fixed layout constants, fixed number
//! formatting), so re-rendering the same inputs produces byte-identical
//! documents.

use crate::ca::FactorModel;
use crate::chronocluster::Dendrogram;
use crate::error::{Error, Result};

const MAP_WIDTH: f64 = 640.0;
const MAP_HEIGHT: f64 = 480.0;
const MAP_MARGIN_LEFT: f64 = 54.0;
const MAP_MARGIN_RIGHT: f64 = 22.0;
const MAP_MARGIN_TOP: f64 = 22.0;
const MAP_MARGIN_BOTTOM: f64 = 46.0;

/// Horizontal slot reserved per leaf.
const LEAF_CELL_W: f64 = 18.0;
/// Minimum height of the label strip under the leaves.
const LEAF_CELL_H: f64 = 24.0;
const DENDRO_PLOT_H: f64 = 480.0;
const DENDRO_MARGIN: f64 = 24.0;
const LEAF_FONT: f64 = 10.0;

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            _ => out.push(c),
        }
    }
    out
}

fn fmt(x: f64) -> String {
    format!("{x:.2}")
}

/// Scatter of the row cloud (unlabeled dots) and the column cloud
/// (labeled square markers) on factors `axes.0` and `axes.1` (1-based).
/// Axis captions carry the percentage of inertia each factor explains,
/// to one decimal.
pub fn render_factor_map(model: &FactorModel, axes: (usize, usize)) -> Result<String> {
    let n_factors = model.n_factors();
    let (a, b) = axes;
    if a == b {
        return Err(Error::usage(format!("axes must differ, got ({a}, {b})")));
    }
    for axis in [a, b] {
        if axis == 0 || axis > n_factors {
            return Err(Error::usage(format!(
                "axis {axis} out of range 1..={n_factors}"
            )));
        }
    }
    let (ai, bi) = (a - 1, b - 1);

    let xs = |m: &nalgebra::DMatrix<f64>, col: usize| -> Vec<f64> {
        (0..m.nrows()).map(|i| m[(i, col)]).collect()
    };
    let row_x = xs(&model.row_coords, ai);
    let row_y = xs(&model.row_coords, bi);
    let col_x = xs(&model.col_coords, ai);
    let col_y = xs(&model.col_coords, bi);

    let extent = |vals: &[f64]| -> (f64, f64) {
        let lo = vals.iter().fold(f64::INFINITY, |m, &v| m.min(v));
        let hi = vals.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        (lo, hi)
    };
    let all_x: Vec<f64> = row_x.iter().chain(&col_x).copied().collect();
    let all_y: Vec<f64> = row_y.iter().chain(&col_y).copied().collect();
    let (x_lo, x_hi) = extent(&all_x);
    let (y_lo, y_hi) = extent(&all_y);
    let pad = |lo: f64, hi: f64| -> (f64, f64) {
        let span = (hi - lo).max(1e-12);
        (lo - 0.08 * span, hi + 0.08 * span)
    };
    let (x_lo, x_hi) = pad(x_lo, x_hi);
    let (y_lo, y_hi) = pad(y_lo, y_hi);

    let plot_w = MAP_WIDTH - MAP_MARGIN_LEFT - MAP_MARGIN_RIGHT;
    let plot_h = MAP_HEIGHT - MAP_MARGIN_TOP - MAP_MARGIN_BOTTOM;
    let sx = |v: f64| MAP_MARGIN_LEFT + (v - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = |v: f64| MAP_MARGIN_TOP + (y_hi - v) / (y_hi - y_lo) * plot_h;

    let pct = |axis: usize| 100.0 * model.eigenvalues[axis] / model.total_inertia;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {MAP_WIDTH} {MAP_HEIGHT}\" \
         width=\"{MAP_WIDTH}\" height=\"{MAP_HEIGHT}\">\n"
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{MAP_WIDTH}\" height=\"{MAP_HEIGHT}\" fill=\"white\"/>\n"
    ));
    // origin crosshair: the clouds are mass-centered, so (0,0) is in view
    svg.push_str(&format!(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\" stroke-width=\"1\"/>\n",
        fmt(sx(x_lo)),
        fmt(sy(0.0)),
        fmt(sx(x_hi)),
        fmt(sy(0.0))
    ));
    svg.push_str(&format!(
        "<line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#999\" stroke-width=\"1\"/>\n",
        fmt(sx(0.0)),
        fmt(sy(y_lo)),
        fmt(sx(0.0)),
        fmt(sy(y_hi))
    ));
    svg.push_str(&format!(
        "<text class=\"axis-caption\" x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">Factor {a} ({:.1}%)</text>\n",
        fmt(MAP_MARGIN_LEFT + plot_w / 2.0),
        fmt(MAP_HEIGHT - 12.0),
        pct(ai)
    ));
    svg.push_str(&format!(
        "<text class=\"axis-caption\" x=\"{x}\" y=\"{y}\" text-anchor=\"middle\" font-size=\"13\" \
         transform=\"rotate(-90 {x} {y})\">Factor {b} ({:.1}%)</text>\n",
        pct(bi),
        x = fmt(16.0),
        y = fmt(MAP_MARGIN_TOP + plot_h / 2.0)
    ));

    for (x, y) in row_x.iter().zip(&row_y) {
        svg.push_str(&format!(
            "<circle class=\"row\" cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"#1f77b4\"/>\n",
            fmt(sx(*x)),
            fmt(sy(*y))
        ));
    }
    for (j, (x, y)) in col_x.iter().zip(&col_y).enumerate() {
        let (cx, cy) = (sx(*x), sy(*y));
        svg.push_str(&format!(
            "<rect class=\"col-marker\" x=\"{}\" y=\"{}\" width=\"5\" height=\"5\" fill=\"#d62728\"/>\n",
            fmt(cx - 2.5),
            fmt(cy - 2.5)
        ));
        svg.push_str(&format!(
            "<text class=\"col\" x=\"{}\" y=\"{}\" font-size=\"11\" fill=\"#d62728\">{}</text>\n",
            fmt(cx + 4.0),
            fmt(cy - 4.0),
            xml_escape(&model.col_labels[j])
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Dendrogram with leaves in sequence order along the horizontal axis
/// (one `18 × 24`-unit cell per leaf by default) and merge heights along
/// the vertical axis. Each merge contributes one horizontal junction bar
/// and two vertical drops.
pub fn render_dendrogram(dend: &Dendrogram, labels: &[String]) -> Result<String> {
    let n = dend.n_leaves();
    if labels.len() != n {
        return Err(Error::usage(format!(
            "{} labels for {} leaves",
            labels.len(),
            n
        )));
    }

    let max_label_chars = labels.iter().map(|l| l.chars().count()).max().unwrap_or(0);
    let label_strip = LEAF_CELL_H.max(6.0 * max_label_chars as f64 + 8.0);
    let width = 2.0 * DENDRO_MARGIN + n as f64 * LEAF_CELL_W;
    let height = DENDRO_MARGIN + DENDRO_PLOT_H + label_strip;

    let h_max = dend
        .merges()
        .last()
        .map(|m| m.height)
        .filter(|&h| h > 0.0)
        .unwrap_or(1.0);
    let leaf_x = |i: usize| DENDRO_MARGIN + (i as f64 + 0.5) * LEAF_CELL_W;
    let y_of = |h: f64| DENDRO_MARGIN + (1.0 - h / h_max) * DENDRO_PLOT_H;
    let y_base = y_of(0.0);

    // node positions by cluster id: leaves 1..=n, then internal in merge order
    let mut pos: Vec<(f64, f64)> = vec![(0.0, 0.0); 2 * n];
    for i in 0..n {
        pos[i + 1] = (leaf_x(i), y_base);
    }

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {} {}\" width=\"{}\" height=\"{}\">\n",
        fmt(width),
        fmt(height),
        fmt(width),
        fmt(height)
    ));
    svg.push_str(&format!(
        "<rect x=\"0\" y=\"0\" width=\"{}\" height=\"{}\" fill=\"white\"/>\n",
        fmt(width),
        fmt(height)
    ));

    for (t, m) in dend.merges().iter().enumerate() {
        let (lx, ly) = pos[m.left];
        let (rx, ry) = pos[m.right];
        let y = y_of(m.height);
        svg.push_str(&format!(
            "<line class=\"drop\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
            fmt(ly),
            fmt(y),
            x = fmt(lx)
        ));
        svg.push_str(&format!(
            "<line class=\"drop\" x1=\"{x}\" y1=\"{}\" x2=\"{x}\" y2=\"{}\" stroke=\"black\" stroke-width=\"1\"/>\n",
            fmt(ry),
            fmt(y),
            x = fmt(rx)
        ));
        svg.push_str(&format!(
            "<line class=\"merge\" x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"black\" stroke-width=\"1\"/>\n",
            fmt(lx),
            fmt(rx),
            y = fmt(y)
        ));
        pos[n + 1 + t] = ((lx + rx) / 2.0, y);
    }

    for (i, label) in labels.iter().enumerate() {
        let x = leaf_x(i);
        svg.push_str(&format!(
            "<text class=\"leaf\" x=\"{x}\" y=\"{y}\" font-size=\"{LEAF_FONT}\" \
             transform=\"rotate(90 {x} {y})\">{}</text>\n",
            xml_escape(label),
            x = fmt(x),
            y = fmt(y_base + 6.0)
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
