//! Artifact rendering: metric tables, shift histograms, correlograms, and
//! cross-validation summaries as CSV, JSON, markdown, or static SVG.
//!
//! CSV and JSON carry full-precision values; markdown rounds for reading.
//! SVG output is deterministic (fixed layout, no timestamps, coordinates
//! printed with fixed precision), so re-rendering reproduces the bytes.

use std::fmt::Write as _;

use dstlab_core::{CVReport, CorrelogramRow, MetricReport, WarpMeasureTable};
use serde_json::Value;

use crate::stamp::{json_artifact, Stamp};

type Report = MetricReport<f64>;

// ---------------------------------------------------------------- metrics

pub fn metrics_csv(stamp: &Stamp, reports: &[Report]) -> String {
    let mut out = stamp.csv_header();
    out.push_str("horizon,n,rmse,mse,mae,me,pearson_r,intercept,slope,prediction_efficiency\n");
    for (i, r) in reports.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            i + 1,
            r.n,
            r.rmse,
            r.mse,
            r.mae,
            r.me,
            r.pearson_r,
            r.intercept,
            r.slope,
            r.prediction_efficiency
        );
    }
    out
}

/// Metric reports as JSON, one object per horizon with the horizon inlined.
pub fn metrics_json(stamp: &Stamp, reports: &[Report]) -> String {
    let rows: Vec<Value> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut map = serde_json::Map::new();
            map.insert("horizon".into(), (i + 1).into());
            if let Value::Object(fields) = serde_json::to_value(r).expect("report serializes") {
                map.extend(fields);
            }
            Value::Object(map)
        })
        .collect();
    json_artifact(stamp, vec![("metrics", Value::Array(rows))])
}

pub fn metrics_markdown(stamp: &Stamp, reports: &[Report]) -> String {
    let mut out = String::from("# Forecast metrics\n\n");
    out.push_str(&stamp.markdown());
    out.push_str("\n| horizon | n | RMSE | MSE | MAE | ME | r | intercept | slope | PE |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for (i, r) in reports.iter().enumerate() {
        let _ = writeln!(
            out,
            "| t+{}h | {} | {:.3} | {:.3} | {:.3} | {:.3} | {:.4} | {:.3} | {:.4} | {:.4} |",
            i + 1,
            r.n,
            r.rmse,
            r.mse,
            r.mae,
            r.me,
            r.pearson_r,
            r.intercept,
            r.slope,
            r.prediction_efficiency
        );
    }
    out
}

// ------------------------------------------------------------ warp measure

pub fn warp_csv(stamp: &Stamp, wm: &WarpMeasureTable) -> String {
    let width = wm.max_window() + 1;
    let mut out = stamp.csv_header();
    out.push_str("horizon,window,total_steps,segments_used,segments_skipped");
    for dt in 0..width {
        let _ = write!(out, ",dt{dt}");
    }
    out.push('\n');
    for (h, padded) in wm.histograms.iter().zip(wm.padded_fractions()) {
        let _ = write!(
            out,
            "{},{},{},{},{}",
            h.horizon, h.window, h.total_steps, h.segments_used, h.segments_skipped
        );
        for cell in padded {
            match cell {
                Some(f) => {
                    let _ = write!(out, ",{f}");
                }
                None => out.push(','),
            }
        }
        out.push('\n');
    }
    out
}

pub fn warp_json(stamp: &Stamp, wm: &WarpMeasureTable) -> String {
    let value = serde_json::to_value(&wm.histograms).expect("histograms serialize");
    json_artifact(stamp, vec![("histograms", value)])
}

pub fn warp_markdown(stamp: &Stamp, wm: &WarpMeasureTable) -> String {
    let width = wm.max_window() + 1;
    let mut out = String::from("# Warp measure\n\n");
    out.push_str(&stamp.markdown());
    out.push_str("\nFraction of warping-path steps at each time shift Δt, per horizon.\n\n");
    out.push_str("| horizon | window |");
    for dt in 0..width {
        let _ = write!(out, " {dt}h |");
    }
    out.push('\n');
    out.push_str("|---|---|");
    out.push_str(&"---|".repeat(width));
    out.push('\n');
    for (h, padded) in wm.histograms.iter().zip(wm.padded_fractions()) {
        let _ = write!(out, "| t+{}h | {} |", h.horizon, h.window);
        for cell in padded {
            match cell {
                Some(f) => {
                    let _ = write!(out, " {f:.4} |");
                }
                None => out.push_str(" — |"),
            }
        }
        out.push('\n');
    }
    let skipped: usize = wm.histograms.iter().map(|h| h.segments_skipped).sum();
    if skipped > 0 {
        let _ = writeln!(
            out,
            "\nSkipped {skipped} segment(s) shorter than the minimum usable length."
        );
    }
    out
}

/// Shift-histogram heatmap: one row per horizon, one column per Δt, cell
/// shading proportional to the fraction.
pub fn warp_svg(stamp: &Stamp, wm: &WarpMeasureTable) -> String {
    let cols = wm.max_window() + 1;
    let rows = wm.histograms.len();
    let (cell_w, cell_h) = (64.0, 36.0);
    let (left, top) = (90.0, 64.0);
    let width = left + cols as f64 * cell_w + 24.0;
    let height = top + rows as f64 * cell_h + 40.0;

    let mut out = svg_open(width, height, stamp, "Warp measure: path-step fraction per time shift");
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="40" text-anchor="middle" font-size="15" font-weight="bold">Fraction of path steps at each time shift</text>"##,
        width / 2.0
    );
    for (dt, x) in (0..cols).map(|dt| (dt, left + dt as f64 * cell_w)) {
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">{}h</text>"##,
            x + cell_w / 2.0,
            top - 8.0,
            dt
        );
    }
    for (r, (hist, padded)) in wm.histograms.iter().zip(wm.padded_fractions()).enumerate() {
        let y = top + r as f64 * cell_h;
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="12">t+{}h</text>"##,
            left - 10.0,
            y + cell_h / 2.0 + 4.0,
            hist.horizon
        );
        for (c, cell) in padded.iter().enumerate() {
            let x = left + c as f64 * cell_w;
            match cell {
                Some(f) => {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{cell_w:.1}" height="{cell_h:.1}" fill="#1f6fb4" fill-opacity="{f:.4}" stroke="#ccc"/>"##
                    );
                    let text_fill = if *f > 0.55 { "#fff" } else { "#222" };
                    let _ = writeln!(
                        out,
                        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11" fill="{text_fill}">{f:.3}</text>"##,
                        x + cell_w / 2.0,
                        y + cell_h / 2.0 + 4.0
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        r##"<rect x="{x:.1}" y="{y:.1}" width="{cell_w:.1}" height="{cell_h:.1}" fill="#f2f2f2" stroke="#ccc"/>"##
                    );
                }
            }
        }
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">time shift Δt (model behind observation by Δt hours)</text>"##,
        left + cols as f64 * cell_w / 2.0,
        height - 14.0
    );
    out.push_str("</svg>\n");
    out
}

// ------------------------------------------------------------ correlograms

pub fn correlogram_csv(stamp: &Stamp, rows: &[CorrelogramRow<f64>]) -> String {
    let mut out = stamp.csv_header();
    out.push_str("lag,value,n_pairs\n");
    for r in rows {
        let _ = writeln!(out, "{},{},{}", r.lag, r.value, r.n_pairs);
    }
    out
}

pub fn correlogram_json(stamp: &Stamp, kind: &str, rows: &[CorrelogramRow<f64>]) -> String {
    let value = serde_json::to_value(rows).expect("rows serialize");
    json_artifact(stamp, vec![("kind", kind.into()), ("rows", value)])
}

/// Stem plot with a lag-dependent 95% white-noise band (±1.96/√n).
pub fn correlogram_svg(stamp: &Stamp, kind: &str, rows: &[CorrelogramRow<f64>]) -> String {
    let (width, height) = (800.0, 320.0);
    let (left, right, top, bottom) = (64.0, 20.0, 52.0, 46.0);
    let (plot_w, plot_h) = (width - left - right, height - top - bottom);
    let max_lag = rows.last().map_or(0, |r| r.lag).max(1);
    let x = |lag: usize| left + plot_w * lag as f64 / max_lag as f64;
    let y = |v: f64| top + plot_h * (1.0 - v) / 2.0;

    let title = match kind {
        "acf" => "Autocorrelation",
        "pacf" => "Partial autocorrelation",
        other => other,
    };
    let mut out = svg_open(width, height, stamp, title);
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="32" text-anchor="middle" font-size="15" font-weight="bold">{title}</text>"##,
        width / 2.0
    );
    for level in [-1.0, -0.5, 0.5, 1.0] {
        let _ = writeln!(
            out,
            r##"<line x1="{left:.1}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" class="grid"/>"##,
            y(level),
            left + plot_w
        );
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="end" font-size="11">{level}</text>"##,
            left - 8.0,
            y(level) + 4.0
        );
    }
    let _ = writeln!(
        out,
        r##"<line x1="{left:.1}" y1="{0:.1}" x2="{1:.1}" y2="{0:.1}" class="axis"/>"##,
        y(0.0),
        left + plot_w
    );
    // 95% white-noise band, following the per-lag pair count.
    for sign in [1.0, -1.0] {
        let mut path = String::new();
        for (i, r) in rows.iter().enumerate() {
            let band = sign * 1.96 / (r.n_pairs.max(1) as f64).sqrt();
            let _ = write!(
                path,
                "{}{:.1},{:.1}",
                if i == 0 { "M" } else { " L" },
                x(r.lag),
                y(band.clamp(-1.0, 1.0))
            );
        }
        let _ = writeln!(
            out,
            r##"<path d="{path}" fill="none" stroke="#888" stroke-width="1" stroke-dasharray="4 3"/>"##
        );
    }
    for r in rows {
        let _ = writeln!(
            out,
            r##"<line x1="{0:.1}" y1="{1:.1}" x2="{0:.1}" y2="{2:.1}" stroke="#1f6fb4" stroke-width="2"/>"##,
            x(r.lag),
            y(0.0),
            y(r.value.clamp(-1.0, 1.0))
        );
        let _ = writeln!(
            out,
            r##"<circle cx="{:.1}" cy="{:.1}" r="3" fill="#1f6fb4"/>"##,
            x(r.lag),
            y(r.value.clamp(-1.0, 1.0))
        );
    }
    let step = (max_lag / 10).max(1);
    for lag in (0..=max_lag).step_by(step) {
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="11">{lag}</text>"##,
            x(lag),
            top + plot_h + 18.0
        );
    }
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">lag (hours)</text>"##,
        left + plot_w / 2.0,
        height - 10.0
    );
    out.push_str("</svg>\n");
    out
}

// ---------------------------------------------------------------- lag plots

pub fn lag_csv(stamp: &Stamp, panels: &[(usize, Vec<(f64, f64)>)]) -> String {
    let mut out = stamp.csv_header();
    out.push_str("lag,x,y\n");
    for (lag, pairs) in panels {
        for (a, b) in pairs {
            let _ = writeln!(out, "{lag},{a},{b}");
        }
    }
    out
}

pub fn lag_json(stamp: &Stamp, panels: &[(usize, Vec<(f64, f64)>)]) -> String {
    let rows: Vec<Value> = panels
        .iter()
        .map(|(lag, pairs)| {
            let mut map = serde_json::Map::new();
            map.insert("lag".into(), (*lag).into());
            map.insert("pairs".into(), serde_json::to_value(pairs).expect("pairs serialize"));
            Value::Object(map)
        })
        .collect();
    json_artifact(stamp, vec![("panels", Value::Array(rows))])
}

/// Scatter panels x(t−lag) vs x(t), shared axes, one panel per lag. Dense
/// series are thinned by a deterministic stride to at most 800 points per
/// panel; each caption shows how many points were drawn.
pub fn lag_svg(stamp: &Stamp, panels: &[(usize, Vec<(f64, f64)>)]) -> String {
    const MAX_POINTS: usize = 800;
    let per_row = 3.min(panels.len()).max(1);
    let rows = panels.len().div_ceil(per_row);
    let (panel, gap, left, top) = (230.0, 26.0, 56.0, 56.0);
    let width = left + per_row as f64 * (panel + gap) + 6.0;
    let height = top + rows as f64 * (panel + gap + 22.0) + 10.0;

    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for (_, pairs) in panels {
        for &(a, b) in pairs {
            lo = lo.min(a).min(b);
            hi = hi.max(a).max(b);
        }
    }
    if !(lo.is_finite() && hi.is_finite()) {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        hi = lo + 1.0;
    }
    let pad = 0.04 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let mut out = svg_open(width, height, stamp, "Lagged scatter");
    let _ = writeln!(
        out,
        r##"<text x="{:.1}" y="32" text-anchor="middle" font-size="15" font-weight="bold">Lagged scatter: x(t−lag) vs x(t)</text>"##,
        width / 2.0
    );
    for (idx, (lag, pairs)) in panels.iter().enumerate() {
        let px = left + (idx % per_row) as f64 * (panel + gap);
        let py = top + (idx / per_row) as f64 * (panel + gap + 22.0);
        let to = |v: f64| (v - lo) / (hi - lo);
        let sx = |v: f64| px + panel * to(v);
        let sy = |v: f64| py + panel * (1.0 - to(v));

        let _ = writeln!(
            out,
            r##"<rect x="{px:.1}" y="{py:.1}" width="{panel:.1}" height="{panel:.1}" fill="none" stroke="#555"/>"##
        );
        let _ = writeln!(
            out,
            r##"<line x1="{:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="#bbb" stroke-dasharray="4 3"/>"##,
            sx(lo),
            sy(lo),
            sx(hi),
            sy(hi)
        );
        let stride = pairs.len().div_ceil(MAX_POINTS).max(1);
        let mut drawn = 0usize;
        for (a, b) in pairs.iter().step_by(stride) {
            let _ = writeln!(
                out,
                r##"<circle cx="{:.1}" cy="{:.1}" r="1.5" fill="#1f6fb4" fill-opacity="0.35"/>"##,
                sx(*a),
                sy(*b)
            );
            drawn += 1;
        }
        let _ = writeln!(
            out,
            r##"<text x="{:.1}" y="{:.1}" text-anchor="middle" font-size="12">lag {lag} ({drawn} of {} pairs)</text>"##,
            px + panel / 2.0,
            py + panel + 16.0,
            pairs.len()
        );
    }
    out.push_str("</svg>\n");
    out
}

// ------------------------------------------------------------------ CV

pub fn cv_json(stamp: &Stamp, report: &CVReport<f64>) -> String {
    let value = serde_json::to_value(report).expect("cv report serializes");
    json_artifact(stamp, vec![("cv", value)])
}

/// Long-form CSV: one row per horizon × metric with fold mean and spread.
pub fn cv_csv(stamp: &Stamp, report: &CVReport<f64>) -> String {
    let mut out = stamp.csv_header();
    out.push_str("horizon,metric,mean,std\n");
    for agg in &report.aggregates {
        for (name, stats) in &agg.metrics {
            let _ = writeln!(out, "{},{},{},{}", agg.horizon, name, stats.mean, stats.std);
        }
    }
    out
}

pub fn cv_markdown(stamp: &Stamp, report: &CVReport<f64>) -> String {
    let mut out = String::from("# Cross-validation\n\n");
    out.push_str(&stamp.markdown());
    let _ = writeln!(
        out,
        "\n{} folds over {} months; each cell is the fold mean ± sample standard deviation.\n",
        report.k,
        report.assignment.len()
    );
    out.push_str("| horizon | RMSE | MAE | ME | r | PE |\n|---|---|---|---|---|---|\n");
    for agg in &report.aggregates {
        let cell = |name: &str| {
            let s = &agg.metrics[name];
            format!("{:.3} ± {:.3}", s.mean, s.std)
        };
        let _ = writeln!(
            out,
            "| t+{}h | {} | {} | {} | {} | {} |",
            agg.horizon,
            cell("rmse"),
            cell("mae"),
            cell("me"),
            cell("pearson_r"),
            cell("prediction_efficiency")
        );
    }
    out
}

// ---------------------------------------------------------------- plumbing

pub fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Opening boilerplate shared by every SVG artifact: fixed size, title,
/// reproducibility `<desc>`, white canvas, minimal styles.
fn svg_open(width: f64, height: f64, stamp: &Stamp, title: &str) -> String {
    let mut desc = stamp.tool_line();
    for (k, v) in stamp.entries() {
        desc.push_str(&format!("; {k}: {v}"));
    }
    let mut out = format!(
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width:.0}" height="{height:.0}" viewBox="0 0 {width:.0} {height:.0}">"##
    );
    out.push('\n');
    let _ = writeln!(out, "<title>{}</title>", xml_escape(title));
    let _ = writeln!(out, "<desc>{}</desc>", xml_escape(&desc));
    out.push_str("<style>text{font-family:sans-serif;fill:#222}.axis{stroke:#555;stroke-width:1}.grid{stroke:#ddd;stroke-width:0.5}</style>\n");
    let _ = writeln!(out, r##"<rect width="{width:.0}" height="{height:.0}" fill="white"/>"##);
    out
}
