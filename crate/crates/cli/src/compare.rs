use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{CliError, Result};
use crate::runner::Summary;
use crate::trace_io::load_trace;

#[derive(Clone, Debug, PartialEq)]
pub struct CompareRow {
    pub source: PathBuf,
    pub solver: String,
    pub iterations: usize,
    /// First iteration within the relative threshold of the reference.
    pub iters_to_threshold: Option<usize>,
    pub best_objective: f64,
    /// Machine-dependent.
    pub total_ms: f64,
    pub inner_backtracks: usize,
    pub outer_trials: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Comparison {
    pub experiment_hash: String,
    pub reference: f64,
    pub rel: f64,
    pub rows: Vec<CompareRow>,
}

fn summary_for(trace: &Path) -> Result<Summary> {
    let path = trace.with_file_name("summary.json");
    let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

/// Loads traces (each with a `summary.json` beside it) of one experiment.
/// The reference objective defaults to the lowest best objective seen.
pub fn compare(traces: &[PathBuf], rel: f64, reference: Option<f64>) -> Result<Comparison> {
    if traces.is_empty() {
        return Err(CliError::Config("compare needs at least one trace".into()));
    }
    let mut hash: Option<(String, &PathBuf)> = None;
    let mut loaded = Vec::with_capacity(traces.len());
    for path in traces {
        let summary = summary_for(path)?;
        match &hash {
            None => hash = Some((summary.experiment_hash.clone(), path)),
            Some((h, first)) if *h != summary.experiment_hash => {
                return Err(CliError::Config(format!(
                    "traces come from different experiments: {} ({h}) vs {} ({})",
                    first.display(),
                    path.display(),
                    summary.experiment_hash
                )))
            }
            Some(_) => {}
        }
        let rows = load_trace(path)?;
        if rows.is_empty() {
            return Err(CliError::Config(format!("{}: trace has no rows", path.display())));
        }
        loaded.push((path.clone(), summary, rows));
    }
    let reference = reference.unwrap_or_else(|| {
        loaded.iter().map(|(_, _, r)| r.last().unwrap().best_objective).fold(f64::INFINITY, f64::min)
    });
    let tol = rel * reference.abs().max(f64::MIN_POSITIVE);
    let rows = loaded
        .into_iter()
        .map(|(source, summary, rows)| CompareRow {
            source,
            solver: summary.solver,
            iterations: rows.len(),
            iters_to_threshold: rows.iter().find(|r| r.best_objective - reference <= tol).map(|r| r.iter),
            best_objective: rows.last().unwrap().best_objective,
            total_ms: rows.last().unwrap().elapsed_ms,
            inner_backtracks: rows.iter().map(|r| r.inner_backtracks).sum(),
            outer_trials: rows.iter().map(|r| r.outer_trials).sum(),
        })
        .collect();
    Ok(Comparison { experiment_hash: hash.unwrap().0, reference, rel, rows })
}

impl Comparison {
    pub fn render(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment {}  reference objective {:.12e}  threshold {:e} relative", self.experiment_hash, self.reference, self.rel);
        let _ = writeln!(
            s,
            "{:<8} {:>8} {:>12} {:>22} {:>14} {:>10} {:>10}",
            "solver", "iters", "iters_to_thr", "best_objective", "time_ms*", "inner_bt", "outer_tr"
        );
        for r in &self.rows {
            let hit = r.iters_to_threshold.map_or_else(|| "-".to_string(), |k| k.to_string());
            let _ = writeln!(
                s,
                "{:<8} {:>8} {:>12} {:>22.14e} {:>14.1} {:>10} {:>10}",
                r.solver, r.iterations, hit, r.best_objective, r.total_ms, r.inner_backtracks, r.outer_trials
            );
        }
        s.push_str("* wall-clock time is machine-dependent\n");
        s
    }
}
