use std::io::Write;
use std::path::{Path, PathBuf};

use cosserat::certificates::{self, Suite};

use crate::error::{CliError, CliResult};
use crate::output;
use crate::scenario::Scenario;
use crate::sweep;

fn place(out: Option<&Path>, path: &Path) -> PathBuf {
    match out {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => {
            std::fs::create_dir_all(p).map_err(|e| CliError::io(p, e))
        }
        _ => Ok(()),
    }
}

/// Load, then either print the explicit scenario or run it and write the
/// CSV (and SVG unless plots are suppressed).
pub fn simulate(path: &Path, dry_run: bool, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let scenario = Scenario::load(path)?;
    if dry_run {
        let text = scenario.explicit.to_toml();
        stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("<stdout>", e))?;
        return Ok(());
    }
    let outcome = scenario.run()?;
    let csv_path = place(out, &scenario.csv_path);
    ensure_parent(&csv_path)?;
    output::save_csv(&outcome.trajectory, scenario.sections(), &csv_path)?;
    if output::plots_enabled() {
        let plot_path = place(out, &scenario.plot_path);
        ensure_parent(&plot_path)?;
        output::save_svg(&outcome.trajectory, scenario.sections(), &plot_path)?;
    }
    let last = outcome.trajectory.last();
    let _ = writeln!(
        stdout,
        "ok t={} accepted={} rejected={} settled={} ss_error_inf={:.3e} peak_error={:.3e} V={:.6e} csv={}",
        last.t,
        outcome.trajectory.totals.accepted,
        outcome.trajectory.totals.rejected,
        outcome.steady.settled,
        outcome.steady.ss_error.amax(),
        outcome.peak_error,
        last.v,
        csv_path.display()
    );
    Ok(())
}

pub fn parse_suites(selector: &str) -> CliResult<Vec<Suite>> {
    if selector == "all" {
        return Ok(Suite::ALL.to_vec());
    }
    Suite::parse(selector).map(|s| vec![s]).ok_or_else(|| {
        CliError::Usage(format!(
            "unknown suite `{selector}`, expected spd | bound | skew | linparam | energy | passivity | all"
        ))
    })
}

/// Run the selected certificate suites; fails if any does not pass.
pub fn verify(selector: &str, seed: u64, samples: Option<usize>, stdout: &mut dyn Write) -> CliResult<()> {
    let suites = parse_suites(selector)?;
    let mut failed = Vec::new();
    for suite in suites {
        let report = certificates::run(suite, seed, samples)?;
        let _ = writeln!(stdout, "{report}");
        if !report.passed {
            failed.push(suite.name());
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Failed(format!("certificate failure: {}", failed.join(", "))))
    }
}

/// Run a sweep and write `summary.csv` next to the variant outputs.
pub fn sweep(path: &Path, jobs: Option<usize>, out: Option<&Path>, stdout: &mut dyn Write) -> CliResult<()> {
    let variants = sweep::load_sweep(path)?;
    let default_dir;
    let dir = match out {
        Some(d) => d,
        None => {
            let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("sweep");
            default_dir = PathBuf::from(format!("{stem}_out"));
            &default_dir
        }
    };
    let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let results = sweep::run_sweep(&variants, jobs, Some(dir), output::plots_enabled())?;
    let summary = dir.join("summary.csv");
    sweep::write_summary(&results, &summary)?;
    let _ = writeln!(stdout, "{}", sweep::SUMMARY_HEADER.join("\t"));
    for row in sweep::summary_rows(&results) {
        let _ = writeln!(stdout, "{}", row.join("\t"));
    }
    let _ = writeln!(stdout, "summary={}", summary.display());
    let worst = results
        .iter()
        .filter_map(|r| r.outcome.as_ref().err())
        .max_by_key(|e| e.exit_code());
    match worst {
        None => Ok(()),
        Some(e) => {
            let n = results.iter().filter(|r| r.outcome.is_err()).count();
            let msg = format!("{n} of {} variants failed; first worst: {}", results.len(), e.one_line());
            Err(match e.exit_code() {
                3 => CliError::Model(cosserat::Error::NonFinite { t: f64::NAN, details: msg }),
                2 => CliError::Validation(msg),
                _ => CliError::Failed(msg),
            })
        }
    }
}
