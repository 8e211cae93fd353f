//! CSV histories, SVG convergence plots and the comparison report.

use std::fmt::Write as _;
use std::path::Path;

use ddlab::solve::ResidualHistory;

use crate::error::{HarnessError, Result};
use crate::experiment::ReportRow;

pub fn write_file(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io(dir.to_path_buf(), e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::Io(path.to_path_buf(), e))
}

pub const HISTORY_HEADER: &str = "iter,interface_residual,global_residual,seconds";

/// One row per recorded iterate; a run that converges at the start has a
/// single row for iteration 0.
pub fn history_csv(history: &ResidualHistory) -> String {
    let mut out = String::from(HISTORY_HEADER);
    out.push('\n');
    for r in &history.rows {
        let _ = writeln!(out, "{},{:e},{:e},{:.6}", r.iteration, r.interface_residual, r.global_residual, r.seconds);
    }
    out
}

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 220.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 50.0;
const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

/// Global residual against iteration on a log scale, one curve per labeled history.
/// Zero residuals cannot be drawn on the log axis and are skipped.
pub fn convergence_svg(curves: &[(String, &ResidualHistory)]) -> String {
    let points: Vec<Vec<(f64, f64)>> = curves
        .iter()
        .map(|(_, h)| {
            h.rows
                .iter()
                .filter(|r| r.global_residual > 0.0 && r.global_residual.is_finite())
                .map(|r| (r.iteration as f64, r.global_residual.log10()))
                .collect()
        })
        .collect();
    let all = points.iter().flatten();
    let max_iter = all.clone().map(|p| p.0).fold(1.0, f64::max);
    let (mut lo, mut hi) = all.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1), hi.max(p.1)));
    if !lo.is_finite() {
        (lo, hi) = (-1.0, 0.0);
    }
    let (lo, hi) = (lo.floor(), hi.ceil().max(lo.floor() + 1.0));

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |i: f64| LEFT + i / max_iter * plot_w;
    let sy = |l: f64| TOP + (hi - l) / (hi - lo) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="black"/>"#
    );
    for e in (lo as i64)..=(hi as i64) {
        let y = sy(e as f64);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" text-anchor="end">1e{e}</text>"##,
            LEFT + plot_w,
            LEFT - 6.0,
            y + 4.0
        );
    }
    let step = ((max_iter / 10.0).ceil() as usize).max(1);
    for i in (0..=max_iter as usize).step_by(step) {
        let x = sx(i as f64);
        let _ = writeln!(
            s,
            r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{i}</text>"#,
            TOP + plot_h + 16.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">iteration</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16 {:.2}) rotate(-90)" text-anchor="middle">global residual</text>"#,
        TOP + plot_h / 2.0
    );

    for (k, ((label, _), pts)) in curves.iter().zip(&points).enumerate() {
        let color = COLORS[k % COLORS.len()];
        let path: Vec<String> = pts.iter().map(|&(i, l)| format!("{:.2},{:.2}", sx(i), sy(l))).collect();
        if !path.is_empty() {
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
                path.join(" ")
            );
        }
        let ly = TOP + 14.0 + 18.0 * k as f64;
        let lx = LEFT + plot_w + 12.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{color}" stroke-width="2"/><text x="{:.2}" y="{ly:.2}">{}</text>"#,
            ly - 4.0,
            lx + 18.0,
            ly - 4.0,
            lx + 24.0,
            escape(label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn status(row: &ReportRow) -> &'static str {
    match (row.converged, row.validated) {
        (true, true) => "ok",
        (false, _) => "not converged",
        (true, false) => "oracle mismatch",
    }
}

fn oracle_cell(row: &ReportRow) -> String {
    row.oracle_error.map_or_else(|| "-".into(), |e| format!("{e:.2e}"))
}

/// Aligned text table with the iteration count and log10 initial residual of each run.
pub fn report_table(rows: &[ReportRow]) -> String {
    let header = ["configuration", "hash", "iterations", "initial residual (log)", "final residual", "oracle error", "status"];
    let cells: Vec<[String; 7]> = rows
        .iter()
        .map(|r| {
            [
                r.label.clone(),
                r.hash.clone(),
                r.iterations.to_string(),
                format!("{:.3}", r.log10_initial()),
                format!("{:.2e}", r.final_residual),
                oracle_cell(r),
                status(r).to_string(),
            ]
        })
        .collect();
    let mut widths = header.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cols: &[&str]| -> String {
        let parts: Vec<String> = cols
            .iter()
            .zip(widths)
            .enumerate()
            .map(|(i, (c, w))| if i == 0 || i == 1 || i == 6 { format!("{c:<w$}") } else { format!("{c:>w$}") })
            .collect();
        parts.join("  ").trim_end().to_string()
    };
    let mut out = line(&header);
    out.push('\n');
    out.push_str(&line(&widths.map(|w| "-".repeat(w)).iter().map(String::as_str).collect::<Vec<_>>()));
    out.push('\n');
    for row in &cells {
        out.push_str(&line(&row.iter().map(String::as_str).collect::<Vec<_>>()));
        out.push('\n');
    }
    out
}

pub const REPORT_HEADER: &str = "label,hash,iterations,log10_initial_residual,final_residual,oracle_error,converged,validated";

/// Machine-readable report; no timings, so identical runs give identical bytes.
pub fn report_csv(rows: &[ReportRow]) -> String {
    let mut out = String::from(REPORT_HEADER);
    out.push('\n');
    for r in rows {
        let label = if r.label.contains([',', '"']) {
            format!("\"{}\"", r.label.replace('"', "\"\""))
        } else {
            r.label.clone()
        };
        let _ = writeln!(
            out,
            "{label},{},{},{:e},{:e},{},{},{}",
            r.hash,
            r.iterations,
            r.log10_initial(),
            r.final_residual,
            r.oracle_error.map_or_else(String::new, |e| format!("{e:e}")),
            r.converged,
            r.validated
        );
    }
    out
}
