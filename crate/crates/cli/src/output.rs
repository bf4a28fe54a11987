//! Trajectory CSV and SVG plots.

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use cosserat::control::SetpointMode;
use cosserat::sim::Trajectory;

use crate::error::{CliError, CliResult};

/// Column names of the trajectory CSV for `sections` sections.
pub fn csv_header(sections: usize) -> Vec<String> {
    let mut h = vec!["t".to_string(), "step_accepted".into(), "step_rejected".into()];
    for prefix in ["q", "qd", "u"] {
        for i in 1..=sections {
            for k in 1..=6 {
                h.push(format!("{prefix}_{i}_{k}"));
            }
        }
    }
    h.push("V".into());
    h.push("Vdot".into());
    h
}

/// 17 significant digits, enough to round-trip every `f64`.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv<W: Write>(traj: &Trajectory, sections: usize, out: W) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(csv_header(sections))?;
    for s in &traj.samples {
        let mut row = vec![
            fmt_float(s.t),
            s.steps.accepted.to_string(),
            s.steps.rejected.to_string(),
        ];
        for v in s.q.iter().chain(s.qdot.iter()).chain(s.u.iter()) {
            row.push(fmt_float(*v));
        }
        row.push(fmt_float(s.v));
        row.push(fmt_float(s.vdot));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn save_csv(traj: &Trajectory, sections: usize, path: &Path) -> CliResult<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    write_csv(traj, sections, std::io::BufWriter::new(file)).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => CliError::io(path, io),
        other => CliError::Failed(format!("{}: {other:?}", path.display())),
    })
}

const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf"];

/// Coordinate (0-based within a section) with the largest regulation error
/// excursion over every section and sample.
pub fn dominant_coordinate(traj: &Trajectory, sections: usize) -> usize {
    let mut best = (0usize, -1.0f64);
    for k in 0..6 {
        let mut peak: f64 = 0.0;
        for s in &traj.samples {
            for i in 0..sections {
                let j = 6 * i + k;
                let e = match traj.mode {
                    SetpointMode::Position => s.q[j] - s.q_ref[j],
                    SetpointMode::Velocity => s.qdot[j] - s.qdot_ref[j],
                };
                peak = peak.max(e.abs());
            }
        }
        if peak > best.1 {
            best = (k, peak);
        }
    }
    best.0
}

/// Per-section traces of one controlled coordinate against time: solid
/// reference lines and dash-dot traces.
pub fn render_svg(traj: &Trajectory, sections: usize, coordinate: usize) -> String {
    const W: f64 = 720.0;
    const H: f64 = 420.0;
    const ML: f64 = 80.0;
    const MR: f64 = 20.0;
    const MT: f64 = 30.0;
    const MB: f64 = 50.0;
    let pick = |s: &cosserat::sim::Sample, j: usize| match traj.mode {
        SetpointMode::Position => (s.q[j], s.q_ref[j]),
        SetpointMode::Velocity => (s.qdot[j], s.qdot_ref[j]),
    };
    let t0 = traj.samples.first().map_or(0.0, |s| s.t);
    let t1 = traj.samples.last().map_or(1.0, |s| s.t).max(t0 + 1e-12);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &traj.samples {
        for i in 0..sections {
            let (v, r) = pick(s, 6 * i + coordinate);
            lo = lo.min(v).min(r);
            hi = hi.max(v).max(r);
        }
    }
    if !(hi > lo) {
        lo -= 1.0;
        hi += 1.0;
    }
    let pad = 0.05 * (hi - lo);
    let (lo, hi) = (lo - pad, hi + pad);
    let x = |t: f64| ML + (t - t0) / (t1 - t0) * (W - ML - MR);
    let y = |v: f64| MT + (hi - v) / (hi - lo) * (H - MT - MB);
    let symbol = match traj.mode {
        SetpointMode::Position => "q",
        SetpointMode::Velocity => "qd",
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let (xa, xb, ya, yb) = (ML, W - MR, MT, H - MB);
    let _ = writeln!(
        svg,
        r#"<path d="M{xa},{ya} L{xa},{yb} L{xb},{yb}" fill="none" stroke="black"/>"#
    );
    for (v, anchor) in [(lo, yb), (hi, ya)] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{v:.3e}</text>"#,
            ML - 6.0,
            anchor + 4.0
        );
    }
    for (t, anchor) in [(t0, "start"), (t1, "end")] {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="{anchor}">{t:.2} s</text>"#,
            x(t),
            yb + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{symbol}_i_{} (solid: reference)</text>"#,
        (xa + xb) / 2.0,
        MT - 10.0,
        coordinate + 1
    );
    for i in 0..sections {
        let j = 6 * i + coordinate;
        let color = COLORS[i % COLORS.len()];
        let mut trace = String::new();
        let mut reference = String::new();
        for (n, s) in traj.samples.iter().enumerate() {
            let (v, r) = pick(s, j);
            let cmd = if n == 0 { 'M' } else { 'L' };
            let _ = write!(trace, "{cmd}{:.2},{:.2} ", x(s.t), y(v));
            let _ = write!(reference, "{cmd}{:.2},{:.2} ", x(s.t), y(r));
        }
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-opacity="0.5" stroke-width="1.5"/>"#,
            reference.trim_end()
        );
        let _ = writeln!(
            svg,
            r#"<path d="{}" fill="none" stroke="{color}" stroke-width="1.5" stroke-dasharray="8 3 2 3"/>"#,
            trace.trim_end()
        );
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{}" fill="{color}">section {}</text>"#,
            xb - 70.0,
            ya + 16.0 * (i as f64 + 1.0),
            i + 1
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn save_svg(traj: &Trajectory, sections: usize, path: &Path) -> CliResult<()> {
    let svg = render_svg(traj, sections, dominant_coordinate(traj, sections));
    std::fs::write(path, svg).map_err(|e| CliError::io(path, e))
}

/// Plots are suppressed when `COSSERAT_NO_PLOT` is set to anything but
/// `0` or the empty string.
pub fn plots_enabled() -> bool {
    !matches!(std::env::var("COSSERAT_NO_PLOT"), Ok(v) if !v.is_empty() && v != "0")
}
