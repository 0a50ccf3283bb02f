use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::Variant;
use super::run::{BenchmarkReport, RowReport};
use crate::error::{Error, Result};
use crate::eta::WindowKind;
use crate::stats::{BootstrapSummary, Verdict};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Csv, Format::Json, Format::Svg];
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| io_err(path, e))
}

/// Writes the requested formats into `dir` and returns the files written.
pub fn emit(report: &BenchmarkReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    for f in formats {
        match f {
            Format::Csv => {
                let p = dir.join("report.csv");
                write_file(&p, &to_csv(report)?)?;
                written.push(p);
            }
            Format::Json => {
                let p = dir.join("report.json");
                write_file(&p, &to_json(report))?;
                written.push(p);
            }
            Format::Svg => {
                for (name, svg) in charts(report) {
                    let p = dir.join(name);
                    write_file(&p, &svg)?;
                    written.push(p);
                }
            }
        }
    }
    Ok(written)
}

pub fn to_json(report: &BenchmarkReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serializes");
    s.push('\n');
    s
}

pub fn load_report(path: &Path) -> Result<BenchmarkReport> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

#[derive(Serialize)]
struct CsvRow {
    seed: u64,
    variant: String,
    window: WindowKind,
    eta: f64,
    standard_mean: Option<f64>,
    standard_ci_low: Option<f64>,
    standard_ci_high: Option<f64>,
    diagnostic_mean: Option<f64>,
    diagnostic_ci_low: Option<f64>,
    diagnostic_ci_high: Option<f64>,
    verdict: &'static str,
    n_accepted_standard: usize,
    n_accepted_arbitrate: usize,
    wall_seconds: f64,
}

fn verdict_name(v: Option<Verdict>) -> &'static str {
    match v {
        Some(Verdict::Positive) => "positive",
        Some(Verdict::Negative) => "negative",
        None => "error",
    }
}

pub fn to_csv(report: &BenchmarkReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &report.rows {
        let s = r.standard.as_ref();
        let d = r.diagnostic.as_ref();
        w.serialize(CsvRow {
            seed: r.seed,
            variant: r.variant.to_string(),
            window: r.window,
            eta: r.eta,
            standard_mean: s.map(|s| s.mean),
            standard_ci_low: s.map(|s| s.ci_low),
            standard_ci_high: s.map(|s| s.ci_high),
            diagnostic_mean: d.map(|d| d.mean),
            diagnostic_ci_low: d.map(|d| d.ci_low),
            diagnostic_ci_high: d.map(|d| d.ci_high),
            verdict: verdict_name(r.verdict),
            n_accepted_standard: r.n_accepted_standard,
            n_accepted_arbitrate: r.n_accepted_arbitrate,
            wall_seconds: r.wall_seconds,
        })
        .map_err(|e| Error::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

/// Plain-text table of the rows, one line each.
pub fn summary_table(report: &BenchmarkReport) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:>6} {:>3} {:>5} {:>6}  {:>24}  {:>24}  {}",
        "seed", "var", "win", "eta", "standard [95% CI]", "diagnostic [95% CI]", "verdict"
    );
    let fmt = |s: Option<&BootstrapSummary>| match s {
        Some(s) => format!("{:.4} [{:.4},{:.4}]", s.mean, s.ci_low, s.ci_high),
        None => "-".to_string(),
    };
    for r in &report.rows {
        let mut verdict = verdict_name(r.verdict).to_string();
        if let Some(e) = &r.error {
            verdict = format!("{verdict} ({e})");
        }
        let _ = writeln!(
            out,
            "{:>6} {:>3} {:>5} {:>6}  {:>24}  {:>24}  {}",
            r.seed,
            r.variant.to_string(),
            r.window.name(),
            r.eta,
            fmt(r.standard.as_ref()),
            fmt(r.diagnostic.as_ref()),
            verdict
        );
    }
    out
}

/// One chart per (seed, variant, window), named `seed<s>_v<variant>_<window>.svg`.
pub fn charts(report: &BenchmarkReport) -> Vec<(String, String)> {
    let mut keys: Vec<(u64, Variant, WindowKind)> = Vec::new();
    for r in &report.rows {
        let k = (r.seed, r.variant, r.window);
        if !keys.contains(&k) {
            keys.push(k);
        }
    }
    keys.into_iter()
        .map(|(seed, variant, window)| {
            let mut rows: Vec<&RowReport> = report
                .rows
                .iter()
                .filter(|r| r.seed == seed && r.variant == variant && r.window == window)
                .collect();
            rows.sort_by(|a, b| a.eta.total_cmp(&b.eta));
            let v = match variant {
                Variant::I => 1,
                Variant::II => 2,
            };
            let title = format!("Variant {variant}, {window} window, seed {seed}");
            (
                format!("seed{seed}_v{v}_{window}.svg"),
                chart_svg(&title, &rows),
            )
        })
        .collect()
}

const WIDTH: f64 = 560.0;
const HEIGHT: f64 = 340.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 64.0;
const STANDARD_COLOR: &str = "#1f77b4";
const DIAGNOSTIC_COLOR: &str = "#d95f02";

pub fn chart_svg(title: &str, rows: &[&RowReport]) -> String {
    let mut values = Vec::new();
    for r in rows {
        for s in [&r.standard, &r.diagnostic].into_iter().flatten() {
            values.extend([s.ci_low, s.ci_high, s.mean]);
        }
    }
    let (mut lo, mut hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo < 1e-9 {
        lo -= 0.5e-3;
        hi += 0.5e-3;
    }
    let pad = 0.08 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);

    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let n = rows.len().max(1);
    let xp = |i: usize| LEFT + plot_w * (i as f64 + 0.5) / n as f64;
    let yp = |v: f64| TOP + plot_h * (hi - v) / (hi - lo);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        WIDTH / 2.0,
        title
    );
    let _ = writeln!(
        s,
        r##"<path d="M{LEFT},{TOP} V{:.1} H{:.1}" fill="none" stroke="#444"/>"##,
        TOP + plot_h,
        LEFT + plot_w
    );
    for k in 0..=4 {
        let v = lo + (hi - lo) * k as f64 / 4.0;
        let y = yp(v);
        let _ = writeln!(
            s,
            r##"<line x1="{:.1}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="#444"/><text x="{:.1}" y="{:.1}" text-anchor="end">{v:.3}</text>"##,
            LEFT - 4.0,
            LEFT - 6.0,
            y + 4.0
        );
    }
    for (i, r) in rows.iter().enumerate() {
        let x = xp(i);
        let base = TOP + plot_h;
        let mark = match (r.verdict, r.starved) {
            (Some(Verdict::Positive), _) => "positive",
            (Some(Verdict::Negative), true) => "negative (starved)",
            (Some(Verdict::Negative), false) => "negative",
            (None, _) => "error",
        };
        let _ = writeln!(
            s,
            r##"<line x1="{x:.1}" y1="{base:.1}" x2="{x:.1}" y2="{:.1}" stroke="#444"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text><text x="{x:.1}" y="{:.1}" text-anchor="middle" font-size="9" fill="#666">{mark}</text>"##,
            base + 4.0,
            base + 16.0,
            r.eta,
            base + 28.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">η</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">⟨X⟩</text>"#,
        TOP + plot_h / 2.0
    );

    for (pick, color) in [(0usize, STANDARD_COLOR), (1usize, DIAGNOSTIC_COLOR)] {
        let get = |r: &RowReport| if pick == 0 { r.standard } else { r.diagnostic };
        for run in runs(rows, get) {
            let mut band = String::new();
            for &(i, b) in &run {
                let _ = write!(band, "{:.2},{:.2} ", xp(i), yp(b.ci_high));
            }
            for &(i, b) in run.iter().rev() {
                let _ = write!(band, "{:.2},{:.2} ", xp(i), yp(b.ci_low));
            }
            let _ = writeln!(
                s,
                r#"<polygon points="{}" fill="{color}" fill-opacity="0.18" stroke="none"/>"#,
                band.trim_end()
            );
            let line: Vec<String> = run
                .iter()
                .map(|&(i, b)| format!("{:.2},{:.2}", xp(i), yp(b.mean)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.8"/>"#,
                line.join(" ")
            );
            for &(i, b) in &run {
                let _ = writeln!(
                    s,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#,
                    xp(i),
                    yp(b.mean)
                );
            }
        }
    }

    let lx = LEFT + 10.0;
    for (k, (label, color)) in [
        ("standard of comparison", STANDARD_COLOR),
        ("simulation diagnostic", DIAGNOSTIC_COLOR),
    ]
    .iter()
    .enumerate()
    {
        let y = TOP + 8.0 + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<rect x="{lx:.1}" y="{:.1}" width="14" height="8" fill="{color}"/><text x="{:.1}" y="{:.1}">{label}</text>"#,
            y - 7.0,
            lx + 20.0,
            y + 1.0
        );
    }
    s.push_str("</svg>\n");
    s
}

/// Contiguous stretches of rows where `get` has a value.
fn runs(
    rows: &[&RowReport],
    get: impl Fn(&RowReport) -> Option<BootstrapSummary>,
) -> Vec<Vec<(usize, BootstrapSummary)>> {
    let mut out: Vec<Vec<(usize, BootstrapSummary)>> = Vec::new();
    let mut cur = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        match get(r) {
            Some(b) => cur.push((i, b)),
            None if !cur.is_empty() => out.push(std::mem::take(&mut cur)),
            None => {}
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}
