//! Sweep files: a `[base]` scenario and `[[variant]]` tables deep-merged
//! over it, each with a unique `name`.
//!
//! ```toml
//! [base.integrator]
//! t_end = 1.5
//!
//! [[variant]]
//! name = "b1"
//! controller = { kind = "pd_cable", mode = "position" }
//!
//! [[variant]]
//! name = "b2"
//! controller = { kind = "pd_grav", mode = "position" }
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;
use toml::{Table, Value};

use crate::error::{CliError, CliResult};
use crate::output;
use crate::scenario::{RunOutcome, Scenario, ScenarioFile};

#[derive(Clone, Debug)]
pub struct Variant {
    pub name: String,
    pub scenario: Scenario,
}

#[derive(Debug)]
pub struct VariantResult {
    pub name: String,
    pub outcome: CliResult<RunOutcome>,
    pub csv_path: PathBuf,
}

fn merge(base: &mut Table, over: &Table) {
    for (k, v) in over {
        match (base.get_mut(k), v) {
            (Some(Value::Table(b)), Value::Table(o)) => merge(b, o),
            _ => {
                base.insert(k.clone(), v.clone());
            }
        }
    }
}

fn parse_error(path: &Path, message: String) -> CliError {
    CliError::Parse {
        path: path.to_path_buf(),
        message,
    }
}

pub fn parse_sweep(text: &str, path: &Path) -> CliResult<Vec<Variant>> {
    let doc: Table = text
        .parse()
        .map_err(|e: toml::de::Error| parse_error(path, e.to_string()))?;
    let mut base = Table::new();
    let mut variants = Vec::new();
    for (k, v) in &doc {
        match (k.as_str(), v) {
            ("base", Value::Table(t)) => base = t.clone(),
            ("variant", Value::Array(items)) => variants = items.clone(),
            _ => {
                return Err(parse_error(
                    path,
                    format!("unknown top-level key `{k}`, expected `base` or `variant`"),
                ))
            }
        }
    }
    if variants.is_empty() {
        return Err(CliError::Validation(format!(
            "{}: sweep lists no [[variant]] tables",
            path.display()
        )));
    }
    let mut seen = HashSet::new();
    let mut out = Vec::with_capacity(variants.len());
    for (idx, item) in variants.iter().enumerate() {
        let Value::Table(table) = item else {
            return Err(parse_error(path, format!("variant {idx} is not a table")));
        };
        let mut table = table.clone();
        let name = match table.remove("name") {
            Some(Value::String(s)) => s,
            _ => return Err(parse_error(path, format!("variant {idx} needs a string `name`"))),
        };
        let safe = !name.is_empty()
            && name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-');
        if !safe {
            return Err(CliError::Validation(format!(
                "variant name `{name}` must be non-empty and use only [A-Za-z0-9_-]"
            )));
        }
        if !seen.insert(name.clone()) {
            return Err(CliError::Validation(format!("duplicate variant name `{name}`")));
        }
        let mut merged = base.clone();
        merge(&mut merged, &table);
        let file = ScenarioFile::deserialize(Value::Table(merged))
            .map_err(|e| parse_error(path, format!("variant `{name}`: {e}")))?;
        let scenario = file
            .resolve()
            .map_err(|e| CliError::Validation(format!("variant `{name}`: {e}")))?;
        out.push(Variant { name, scenario });
    }
    Ok(out)
}

pub fn load_sweep(path: &Path) -> CliResult<Vec<Variant>> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_sweep(&text, path)
}

/// Run every variant, `jobs` at a time, writing `<out>/<name>.csv` (and an
/// SVG when `plots`). Output paths in the scenario tables are ignored.
pub fn run_sweep(
    variants: &[Variant],
    jobs: usize,
    out_dir: Option<&Path>,
    plots: bool,
) -> CliResult<Vec<VariantResult>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    Ok(pool.install(|| {
        variants
            .par_iter()
            .map(|v| {
                let dir = out_dir.unwrap_or(Path::new(""));
                let csv_path = dir.join(format!("{}.csv", v.name));
                let outcome = v.scenario.run().and_then(|o| {
                    if out_dir.is_some() {
                        let n = v.scenario.sections();
                        output::save_csv(&o.trajectory, n, &csv_path)?;
                        if plots {
                            output::save_svg(&o.trajectory, n, &dir.join(format!("{}.svg", v.name)))?;
                        }
                    }
                    Ok(o)
                });
                VariantResult {
                    name: v.name.clone(),
                    outcome,
                    csv_path,
                }
            })
            .collect()
    }))
}

pub const SUMMARY_HEADER: [&str; 11] = [
    "name",
    "status",
    "settled",
    "settle_time",
    "ss_error_inf",
    "relative_offset",
    "peak_error",
    "zero_crossings",
    "accepted_steps",
    "rejected_steps",
    "message",
];

fn opt(v: Option<f64>) -> String {
    v.map(output::fmt_float).unwrap_or_default()
}

pub fn summary_rows(results: &[VariantResult]) -> Vec<Vec<String>> {
    results
        .iter()
        .map(|r| match &r.outcome {
            Ok(o) => vec![
                r.name.clone(),
                "ok".into(),
                o.steady.settled.to_string(),
                opt(o.steady.settle_time),
                output::fmt_float(o.steady.ss_error.amax()),
                opt(o.relative_offset),
                output::fmt_float(o.peak_error),
                o.zero_crossings.to_string(),
                o.trajectory.totals.accepted.to_string(),
                o.trajectory.totals.rejected.to_string(),
                String::new(),
            ],
            Err(e) => {
                let mut row = vec![r.name.clone(), "failed".into()];
                row.extend(std::iter::repeat_n(String::new(), 8));
                row.push(e.one_line());
                row
            }
        })
        .collect()
}

pub fn write_summary(results: &[VariantResult], path: &Path) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::Failed(e.to_string()))?;
    let mut rows = vec![SUMMARY_HEADER.iter().map(|s| s.to_string()).collect()];
    rows.extend(summary_rows(results));
    for row in rows {
        w.write_record(&row).map_err(|e| CliError::Failed(e.to_string()))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}
