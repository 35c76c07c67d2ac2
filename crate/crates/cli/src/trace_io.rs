//! Trace CSV with a fixed column order; `elapsed_ms` is last so determinism
//! checks can drop it.

use std::io::{BufRead, Write};
use std::path::Path;

use rpdhg_core::solvers::{Trace, TraceRow};

use crate::error::{CliError, Result};

pub const COLUMNS: [&str; 10] = [
    "iter",
    "objective",
    "best_objective",
    "residual_norm",
    "tau",
    "alpha",
    "inner_backtracks",
    "outer_trials",
    "activated",
    "elapsed_ms",
];

/// One parsed CSV row.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRecord {
    pub iter: usize,
    pub objective: f64,
    pub best_objective: f64,
    pub residual_norm: f64,
    pub tau: f64,
    pub alpha: f64,
    pub inner_backtracks: usize,
    pub outer_trials: usize,
    pub activated: bool,
    pub elapsed_ms: f64,
}

impl From<&TraceRow> for TraceRecord {
    fn from(r: &TraceRow) -> Self {
        TraceRecord {
            iter: r.iter,
            objective: r.objective,
            best_objective: r.best_objective,
            residual_norm: r.residual_norm,
            tau: r.tau,
            alpha: r.alpha,
            inner_backtracks: r.inner_backtracks,
            outer_trials: r.outer_trials,
            activated: r.activated,
            elapsed_ms: r.elapsed_ms,
        }
    }
}

pub fn write_trace<W: Write>(w: &mut W, trace: &Trace) -> std::io::Result<()> {
    writeln!(w, "{}", COLUMNS.join(","))?;
    for r in &trace.rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{:.3}",
            r.iter,
            r.objective,
            r.best_objective,
            r.residual_norm,
            r.tau,
            r.alpha,
            r.inner_backtracks,
            r.outer_trials,
            u8::from(r.activated),
            r.elapsed_ms
        )?;
    }
    Ok(())
}

pub fn save_trace(path: &Path, trace: &Trace) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = std::io::BufWriter::new(file);
    write_trace(&mut w, trace).and_then(|_| w.flush()).map_err(|e| CliError::io(path, e))
}

pub fn read_trace<R: BufRead>(r: R, source: &str) -> Result<Vec<TraceRecord>> {
    let bad = |line: usize, msg: &str| CliError::Config(format!("{source}:{line}: {msg}"));
    let mut lines = r.lines();
    let header = lines.next().ok_or_else(|| bad(1, "empty trace"))?.map_err(|e| CliError::Io(e.to_string()))?;
    if header.trim() != COLUMNS.join(",") {
        return Err(bad(1, "unexpected trace header"));
    }
    let mut out = Vec::new();
    for (k, line) in lines.enumerate() {
        let line = line.map_err(|e| CliError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let no = k + 2;
        let f: Vec<&str> = line.trim().split(',').collect();
        if f.len() != COLUMNS.len() {
            return Err(bad(no, "wrong number of columns"));
        }
        let num = |i: usize| f[i].parse::<f64>().map_err(|_| bad(no, &format!("bad {}", COLUMNS[i])));
        let int = |i: usize| f[i].parse::<usize>().map_err(|_| bad(no, &format!("bad {}", COLUMNS[i])));
        out.push(TraceRecord {
            iter: int(0)?,
            objective: num(1)?,
            best_objective: num(2)?,
            residual_norm: num(3)?,
            tau: num(4)?,
            alpha: num(5)?,
            inner_backtracks: int(6)?,
            outer_trials: int(7)?,
            activated: match f[8] {
                "0" => false,
                "1" => true,
                _ => return Err(bad(no, "bad activated")),
            },
            elapsed_ms: num(9)?,
        });
    }
    Ok(out)
}

pub fn load_trace(path: &Path) -> Result<Vec<TraceRecord>> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(std::io::BufReader::new(file), &path.display().to_string())
}

/// Trace text with the `elapsed_ms` column removed.
pub fn strip_elapsed(csv: &str) -> String {
    csv.lines().map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head)).collect::<Vec<_>>().join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rpdhg_core::solvers::SolverKind;

    fn sample() -> Trace {
        let row = |iter: usize, obj: f64| TraceRow {
            iter,
            objective: obj,
            best_objective: obj,
            residual_norm: 0.1 / iter as f64,
            nominal_residual: 0.2,
            tau: 1.0 / 3.0,
            alpha: 0.5,
            inner_backtracks: 2,
            outer_trials: 3,
            activated: iter.is_multiple_of(2),
            elapsed_ms: 1.25 * iter as f64,
        };
        Trace { solver: SolverKind::Rpdhg, alpha_bar: 0.5, eps: 0.01, rows: vec![row(1, 3.0), row(2, 2.0 + 1e-17)] }
    }

    #[test]
    fn round_trip_is_lossless() {
        let t = sample();
        let mut buf = Vec::new();
        write_trace(&mut buf, &t).unwrap();
        let back = read_trace(&buf[..], "mem").unwrap();
        let expect: Vec<TraceRecord> = t.rows.iter().map(TraceRecord::from).collect();
        assert_eq!(back, expect);
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("iter,objective,best_objective,residual_norm,tau,alpha,inner_backtracks,outer_trials,activated,elapsed_ms\n"));
        assert!(!strip_elapsed(&text).contains("elapsed_ms"));
    }

    #[test]
    fn malformed_traces() {
        assert!(read_trace(&b""[..], "m").is_err());
        assert!(read_trace(&b"iter,objective\n"[..], "m").is_err());
        let bad = format!("{}\n1,2,3\n", COLUMNS.join(","));
        assert!(read_trace(bad.as_bytes(), "m").is_err());
    }
}
