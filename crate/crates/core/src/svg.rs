//! Minimal deterministic SVG line/scatter charts for report tables.

use crate::error::{Error, Result};
use crate::io::Table;

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 20.0;
const MARGIN_T: f64 = 30.0;
const MARGIN_B: f64 = 55.0;

const PALETTE: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn fmt(v: f64) -> String {
    let mut buf = ryu::Buffer::new();
    buf.format(v).to_string()
}

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Renders column 0 against every other column as polyline + markers.
pub fn line_chart(table: &Table) -> Result<String> {
    if table.columns.len() < 2 {
        return Err(Error::InvalidArgument(
            "a chart needs an x column and at least one series".into(),
        ));
    }
    let finite_rows: Vec<&Vec<f64>> = table
        .rows
        .iter()
        .filter(|r| r.iter().all(|v| v.is_finite()))
        .collect();
    if finite_rows.is_empty() {
        return Err(Error::InvalidArgument("no finite rows to plot".into()));
    }
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for row in &finite_rows {
        xmin = xmin.min(row[0]);
        xmax = xmax.max(row[0]);
        for v in &row[1..] {
            ymin = ymin.min(*v);
            ymax = ymax.max(*v);
        }
    }
    if xmax == xmin {
        xmax = xmin + 1.0;
    }
    if ymax == ymin {
        ymax = ymin + 1.0;
    }
    let plot_w = WIDTH - MARGIN_L - MARGIN_R;
    let plot_h = HEIGHT - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| MARGIN_L + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = move |y: f64| MARGIN_T + (1.0 - (y - ymin) / (ymax - ymin)) * plot_h;

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"13\">\n"
    ));
    out.push_str(&format!(
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n"
    ));
    // frame
    out.push_str(&format!(
        "  <rect x=\"{MARGIN_L}\" y=\"{MARGIN_T}\" width=\"{plot_w}\" height=\"{plot_h}\" \
         fill=\"none\" stroke=\"#333\"/>\n"
    ));
    // axis labels and min/max ticks
    out.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        MARGIN_L + plot_w / 2.0,
        HEIGHT - 12.0,
        esc(&table.columns[0])
    ));
    let ylabel = table.columns[1..].join(", ");
    out.push_str(&format!(
        "  <text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n",
        MARGIN_T + plot_h / 2.0,
        MARGIN_T + plot_h / 2.0,
        esc(&ylabel)
    ));
    for (v, x) in [(xmin, sx(xmin)), (xmax, sx(xmax))] {
        out.push_str(&format!(
            "  <text x=\"{x}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
            HEIGHT - MARGIN_B + 18.0,
            fmt(v)
        ));
    }
    for (v, y) in [(ymin, sy(ymin)), (ymax, sy(ymax))] {
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>\n",
            MARGIN_L - 6.0,
            y + 4.0,
            fmt(v)
        ));
    }
    // series
    for series in 1..table.columns.len() {
        let color = PALETTE[(series - 1) % PALETTE.len()];
        let points: Vec<String> = finite_rows
            .iter()
            .map(|row| format!("{},{}", fmt(sx(row[0])), fmt(sy(row[series]))))
            .collect();
        out.push_str(&format!(
            "  <polyline fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\" points=\"{}\"/>\n",
            points.join(" ")
        ));
        if finite_rows.len() <= 64 {
            for row in &finite_rows {
                out.push_str(&format!(
                    "  <circle cx=\"{}\" cy=\"{}\" r=\"2.5\" fill=\"{color}\"/>\n",
                    fmt(sx(row[0])),
                    fmt(sy(row[series]))
                ));
            }
        }
        // legend entry
        out.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            MARGIN_L + 10.0,
            MARGIN_T + 16.0 * series as f64,
            esc(&table.columns[series])
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}
