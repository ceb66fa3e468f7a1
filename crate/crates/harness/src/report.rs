//! CSV, SVG and Markdown output.

use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};
use num_complex::Complex64;

use crate::config::PreconditionerId;
use crate::runner::ResultRow;

pub const CSV_HEADER: &str =
    "experiment,problem,element,h,kappa,mu,preconditioner,solver,epsilon,p,theta,iterations,converged,final_residual,wall_time_s,notes";

/// 17 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

fn cmp_f64(a: f64, b: f64) -> Ordering {
    a.total_cmp(&b)
}

/// Emission order: experiment, problem, element, preconditioner, solver,
/// precision, then decreasing `h` and increasing wavenumber.
pub fn sort_rows(rows: &mut [ResultRow]) {
    rows.sort_by(|a, b| {
        let (x, y) = (&a.cell, &b.cell);
        x.experiment
            .cmp(&y.experiment)
            .then(x.problem.id.cmp(&y.problem.id))
            .then(x.element.degree().cmp(&y.element.degree()))
            .then(x.preconditioner.cmp(&y.preconditioner))
            .then(x.solver.cmp(&y.solver))
            .then(match (x.epsilon, y.epsilon) {
                (None, None) => Ordering::Equal,
                (None, Some(_)) => Ordering::Less,
                (Some(_), None) => Ordering::Greater,
                (Some(e), Some(f)) => cmp_f64(f, e),
            })
            .then(cmp_f64(y.h, x.h))
            .then(cmp_f64(x.problem.kappa, y.problem.kappa))
    });
}

pub fn csv_line(row: &ResultRow, timings: bool) -> String {
    let c = &row.cell;
    let fmm = c.preconditioner == PreconditionerId::Fmm;
    let order = match c.epsilon {
        Some(_) => row.note("p").unwrap_or_default().to_string(),
        None if fmm => c.p.to_string(),
        None => String::new(),
    };
    let notes: Vec<String> = row.notes.iter().filter(|(k, _)| k != "p").map(|(k, v)| format!("{k}={v}")).collect();
    [
        c.experiment.clone(),
        c.problem.id.name().to_string(),
        c.element.name().to_string(),
        fmt_float(c.h),
        fmt_float(c.problem.kappa),
        c.problem.mu.map(fmt_float).unwrap_or_default(),
        c.preconditioner.name().to_string(),
        c.solver.name().to_string(),
        c.epsilon.map(fmt_float).unwrap_or_default(),
        order,
        if fmm { fmt_float(c.theta) } else { String::new() },
        row.iterations.to_string(),
        row.converged.to_string(),
        fmt_float(row.final_residual),
        fmt_float(if timings { row.wall_time_s } else { 0.0 }),
        notes.join(";"),
    ]
    .join(",")
}

/// Header plus one line per row, in the given order. Wall times are written
/// as zero unless `timings` is set, so reruns are byte-identical.
pub fn csv_string(rows: &[ResultRow], timings: bool) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&csv_line(r, timings));
        s.push('\n');
    }
    s
}

pub fn write_csv(rows: &[ResultRow], path: &Path, timings: bool) -> Result<()> {
    write(path, &csv_string(rows, timings))
}

pub fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"];
const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: (f64, f64, f64, f64) = (60.0, 20.0, 40.0, 50.0);

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn svg_open(title: &str) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="16" text-anchor="middle" font-size="13">{}</text>"#, WIDTH / 2.0, escape(title));
    s
}

fn legend(s: &mut String, labels: &[String]) {
    let (_, right, top, _) = MARGIN;
    for (k, label) in labels.iter().enumerate() {
        let y = top + 14.0 + 14.0 * k as f64;
        let x = WIDTH - right - 150.0;
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{color}" stroke-width="2"/>"#, x + 18.0);
        let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, x + 22.0, y + 4.0, escape(label));
    }
}

/// Residual histories against iteration count on a log scale.
pub fn convergence_svg(title: &str, series: &[(String, Vec<f64>)]) -> String {
    let (left, right, top, bottom) = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let max_len = series.iter().map(|(_, h)| h.len()).max().unwrap_or(1).max(2) - 1;
    let floor = series
        .iter()
        .flat_map(|(_, h)| h.iter().copied())
        .filter(|v| *v > 0.0)
        .fold(1.0f64, f64::min)
        .log10()
        .floor()
        .min(-1.0);
    let ceil = series.iter().flat_map(|(_, h)| h.iter().copied()).fold(1.0f64, f64::max).log10().ceil().max(0.0);
    let x_of = |i: usize| left + pw * i as f64 / max_len as f64;
    let y_of = |v: f64| top + ph * (ceil - v.max(10f64.powf(floor)).log10()) / (ceil - floor);
    let mut s = svg_open(title);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let mut d = floor as i32;
    while d <= ceil as i32 {
        let y = y_of(10f64.powi(d));
        let _ = writeln!(s, r##"<line x1="{left}" y1="{y:.2}" x2="{}" y2="{y:.2}" stroke="#ddd"/>"##, left + pw);
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">1e{d}</text>"#, left - 4.0, y + 4.0);
        d += 1;
    }
    let step = (max_len / 10).max(1);
    for i in (0..=max_len).step_by(step) {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="middle">{i}</text>"#, x_of(i), top + ph + 14.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">iteration</text>"#, left + pw / 2.0, HEIGHT - 8.0);
    let _ = writeln!(
        s,
        r#"<text x="14" y="{}" text-anchor="middle" transform="rotate(-90 14 {})">relative residual</text>"#,
        top + ph / 2.0,
        top + ph / 2.0
    );
    for (k, (_, h)) in series.iter().enumerate() {
        let pts: Vec<String> = h.iter().enumerate().map(|(i, &v)| format!("{:.2},{:.2}", x_of(i), y_of(v))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
            PALETTE[k % PALETTE.len()],
            pts.join(" ")
        );
    }
    legend(&mut s, &series.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// Eigenvalues in the complex plane.
pub fn scatter_svg(title: &str, series: &[(String, Vec<Complex64>)]) -> String {
    let (left, right, top, bottom) = MARGIN;
    let (pw, ph) = (WIDTH - left - right, HEIGHT - top - bottom);
    let all = || series.iter().flat_map(|(_, v)| v.iter().copied());
    let (mut x0, mut x1) = all().fold((0.0f64, 0.0f64), |(a, b), z| (a.min(z.re), b.max(z.re)));
    let (mut y0, mut y1) = all().fold((0.0f64, 0.0f64), |(a, b), z| (a.min(z.im), b.max(z.im)));
    let pad = |lo: &mut f64, hi: &mut f64| {
        let span = (*hi - *lo).max(1e-3);
        *lo -= 0.05 * span;
        *hi += 0.05 * span;
    };
    pad(&mut x0, &mut x1);
    pad(&mut y0, &mut y1);
    let x_of = |v: f64| left + pw * (v - x0) / (x1 - x0);
    let y_of = |v: f64| top + ph * (y1 - v) / (y1 - y0);
    let mut s = svg_open(title);
    let _ = writeln!(s, r#"<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    let _ = writeln!(s, r##"<line x1="{:.2}" y1="{top}" x2="{:.2}" y2="{}" stroke="#999"/>"##, x_of(0.0), x_of(0.0), top + ph);
    let _ = writeln!(s, r##"<line x1="{left}" y1="{:.2}" x2="{}" y2="{:.2}" stroke="#999"/>"##, y_of(0.0), left + pw, y_of(0.0));
    for (v, anchor) in [(x0, "start"), (x1, "end")] {
        let _ = writeln!(s, r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{v:.3}</text>"#, x_of(v), top + ph + 14.0);
    }
    for v in [y0, y1] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{v:.3}</text>"#, left - 4.0, y_of(v) + 4.0);
    }
    let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">Re</text>"#, left + pw / 2.0, HEIGHT - 8.0);
    let _ = writeln!(s, r#"<text x="14" y="{}" text-anchor="middle">Im</text>"#, top + ph / 2.0);
    for (k, (_, v)) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        for z in v {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="1.6" fill="{color}"/>"#, x_of(z.re), y_of(z.im));
        }
    }
    legend(&mut s, &series.iter().map(|(l, _)| l.clone()).collect::<Vec<_>>());
    s.push_str("</svg>\n");
    s
}

/// `re,im` lines.
pub fn eigenvalue_csv(eigenvalues: &[Complex64]) -> String {
    let mut s = String::from("re,im\n");
    for z in eigenvalues {
        let _ = writeln!(s, "{},{}", fmt_float(z.re), fmt_float(z.im));
    }
    s
}

fn column_label(row: &ResultRow) -> String {
    let c = &row.cell;
    let mut label = c.preconditioner.name().to_uppercase();
    if let Some(e) = c.epsilon {
        let _ = write!(label, " eps={e:e}");
    }
    if c.solver.name() != "gmres" {
        let _ = write!(label, " ({})", c.solver.name());
    }
    label
}

fn row_label(row: &ResultRow) -> String {
    let c = &row.cell;
    let h = format!("2^-{}", (1.0 / c.h).log2().round());
    let param = match c.problem.mu {
        Some(mu) => format!("mu={mu}"),
        None => format!("kappa={}", c.problem.kappa),
    };
    format!("{} {} h={h} {param}", c.problem.id.name(), c.element.name())
}

/// Iteration table, one line per mesh and wavenumber, "—" for cells that did
/// not converge.
pub fn summary_markdown(title: &str, rows: &[ResultRow]) -> String {
    let mut columns: Vec<String> = Vec::new();
    let mut lines: Vec<String> = Vec::new();
    for r in rows {
        let (c, l) = (column_label(r), row_label(r));
        if !columns.contains(&c) {
            columns.push(c);
        }
        if !lines.contains(&l) {
            lines.push(l);
        }
    }
    let mut s = format!("## {title}\n\n| case | {} | AMG |\n|---|{}---|\n", columns.join(" | "), "---|".repeat(columns.len()));
    for l in &lines {
        let cells: Vec<String> = columns
            .iter()
            .map(|c| {
                rows.iter()
                    .find(|r| &row_label(r) == l && &column_label(r) == c)
                    .map(|r| if r.converged { r.iterations.to_string() } else { "—".to_string() })
                    .unwrap_or_default()
            })
            .collect();
        let _ = writeln!(s, "| {l} | {} | not reproduced |", cells.join(" | "));
    }
    s
}
