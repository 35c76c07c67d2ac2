use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rpdhg_core::problems::{gen_lasso, gen_mri_problem, gen_tv1d, gen_tv2d, synthetic_image, MriParams, ProblemInstance};
use rpdhg_core::solvers::{solve, Clock, Solution, SolverKind, Trace};
use rpdhg_core::tuning::{tune, TuningGrid};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::image_io::{self, Image};
use crate::spec::{ProblemParams, RunSpec, SolverChoice, SolverSettings};
use crate::trace_io::save_trace;

/// Milliseconds since construction.
pub struct WallClock(Instant);

impl WallClock {
    pub fn start() -> Self {
        WallClock(Instant::now())
    }
}

impl Clock for WallClock {
    fn elapsed_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tuning {
    pub grid: Vec<f64>,
    pub iters: usize,
    pub value: f64,
    pub scores: Vec<(f64, Option<f64>)>,
}

/// Written next to every trace; `compare` keys on `experiment_hash`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub experiment_hash: String,
    pub experiment: String,
    pub solver: String,
    pub iterations: usize,
    pub final_objective: f64,
    pub best_objective: f64,
    pub total_ms: f64,
    pub tuning: Option<Tuning>,
    /// `||recon - truth|| / ||truth||` for image problems.
    pub relative_error: Option<f64>,
    /// Same measure for the zero-filled inverse DFT (MRI only).
    pub zero_filled_error: Option<f64>,
}

pub struct SolverRun {
    pub kind: SolverKind,
    pub solution: Solution,
    pub trace: Trace,
    pub summary: Summary,
    /// Final location of this solver's artifacts.
    pub dir: PathBuf,
}

pub struct RunOutcome {
    pub experiment_hash: String,
    pub runs: Vec<SolverRun>,
}

pub fn build_instance(spec: &RunSpec) -> Result<ProblemInstance> {
    let seed = spec.seed;
    Ok(match &spec.experiment {
        ProblemParams::Lasso { n, lambda } => gen_lasso(*n, *lambda, seed)?,
        ProblemParams::Tv1d { num_segs, len_segs, noise, lambda } => gen_tv1d(*num_segs, *len_segs, *noise, *lambda, seed)?,
        ProblemParams::Tv2d { size, noise, image, .. } => {
            let split = spec.experiment.split_method()?.expect("tv2d has a split");
            let img = match image {
                Some(path) => image_io::load(path)?,
                None => Image::new(*size, *size, synthetic_image(*size, *size)),
            };
            gen_tv2d(&img.data, img.rows, img.cols, *noise, seed, split)?
        }
        ProblemParams::Mri { size, nu, burden, noise, eps, levels } => gen_mri_problem(&MriParams {
            rows: *size,
            cols: *size,
            nu: *nu,
            burden: *burden,
            sigma: *noise,
            eps: *eps,
            levels: *levels,
            seed,
        })?,
    })
}

fn staging_dir(out: &Path) -> Result<PathBuf> {
    let name = out
        .file_name()
        .ok_or_else(|| CliError::Config(format!("output path '{}' has no final component", out.display())))?;
    let mut staged = name.to_os_string();
    staged.push(format!(".partial-{}", std::process::id()));
    Ok(out.with_file_name(staged))
}

/// Generates the problem, runs every requested solver and writes artifacts.
/// Outputs are staged next to `spec.out` and moved into place only when
/// everything succeeded.
pub fn run(spec: &RunSpec) -> Result<RunOutcome> {
    spec.validate()?;
    let inst = build_instance(spec)?;
    let staging = staging_dir(&spec.out)?;
    if staging.exists() {
        std::fs::remove_dir_all(&staging).map_err(|e| CliError::io(&staging, e))?;
    }
    std::fs::create_dir_all(&staging).map_err(|e| CliError::io(&staging, e))?;
    let result = run_staged(spec, &inst, &staging).and_then(|runs| {
        promote(&staging, &spec.out)?;
        Ok(runs)
    });
    if staging.exists() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    let runs = result?;
    Ok(RunOutcome { experiment_hash: spec.experiment_hash(), runs })
}

fn run_staged(spec: &RunSpec, inst: &ProblemInstance, staging: &Path) -> Result<Vec<SolverRun>> {
    let kinds = spec.solver.kinds();
    let fan_out = matches!(spec.solver, SolverChoice::All);
    let dirs: Vec<(PathBuf, PathBuf)> = kinds
        .iter()
        .map(|k| if fan_out { (staging.join(k.name()), spec.out.join(k.name())) } else { (staging.to_path_buf(), spec.out.clone()) })
        .collect();
    if kinds.len() == 1 {
        return Ok(vec![run_one(spec, inst, kinds[0], &dirs[0].0, &dirs[0].1)?]);
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = kinds
            .iter()
            .zip(&dirs)
            .map(|(k, (stage, fin))| s.spawn(move || run_one(spec, inst, *k, stage, fin)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(CliError::Numerical("solver thread panicked".into()))))
            .collect()
    })
}

fn run_one(spec: &RunSpec, inst: &ProblemInstance, kind: SolverKind, stage: &Path, fin: &Path) -> Result<SolverRun> {
    std::fs::create_dir_all(stage).map_err(|e| CliError::io(stage, e))?;
    let mut cfg = spec.config.to_core(spec.seed);
    let mut tuning = None;
    if spec.tune && kind != SolverKind::Rpdhg {
        let grid = TuningGrid::default();
        let t = tune(kind, &inst.problem, &cfg, &grid)?;
        cfg = t.config;
        tuning = Some(Tuning { grid: grid.values, iters: grid.iters, value: t.value.unwrap_or(f64::NAN), scores: t.scores });
    }
    let clock = WallClock::start();
    let (solution, trace) = solve(kind, &inst.problem, &cfg, &clock)?;
    let total_ms = clock.elapsed_ms();

    let resolved = RunSpec {
        solver: SolverChoice::One(kind),
        config: SolverSettings::from_core(&cfg),
        tune: false,
        out: fin.to_path_buf(),
        ..spec.clone()
    };
    let write = |name: &str, text: String| {
        let p = stage.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::io(&p, e))
    };
    save_trace(&stage.join("trace.csv"), &trace)?;
    write("config.json", resolved.to_json() + "\n")?;

    let (relative_error, zero_filled_error) = write_solution(stage, inst, &solution.best_x)?;
    let summary = Summary {
        experiment_hash: spec.experiment_hash(),
        experiment: inst.kind.name().into(),
        solver: kind.name().into(),
        iterations: solution.iterations,
        final_objective: solution.objective,
        best_objective: solution.best_objective,
        total_ms,
        tuning,
        relative_error,
        zero_filled_error,
    };
    write("summary.json", serde_json::to_string_pretty(&summary).expect("summaries serialize") + "\n")?;
    Ok(SolverRun { kind, solution, trace, summary, dir: fin.to_path_buf() })
}

fn write_solution(dir: &Path, inst: &ProblemInstance, x: &[f64]) -> Result<(Option<f64>, Option<f64>)> {
    let save = |name: &str, img: &Image| image_io::save_pgm(&dir.join(name), img);
    if let (Some((rows, cols)), Some(truth)) = (inst.grid, inst.truth.as_ref()) {
        let (recon, noisy, zf) = match &inst.mri {
            Some(mri) => {
                let masks = [("mask_pf.pgm", &mri.pf), ("mask_vd.pgm", &mri.vd), ("mask.pgm", &mri.both)];
                for (name, mask) in masks {
                    let bits = mask.centered().into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect();
                    save(name, &Image::new(rows, cols, bits))?;
                }
                (mri.reconstruct(x)?, mri.zero_filled.clone(), Some(mri.zero_filled_error()))
            }
            None => (x.to_vec(), inst.data.clone(), None),
        };
        let diff: Vec<f64> = recon.iter().zip(truth).map(|(r, t)| 4.0 * (r - t).abs()).collect();
        save("input.pgm", &Image::new(rows, cols, truth.clone()))?;
        save("noisy.pgm", &Image::new(rows, cols, noisy))?;
        save("diff4x.pgm", &Image::new(rows, cols, diff))?;
        let recon_img = Image::new(rows, cols, recon.clone());
        save("recon.pgm", &recon_img)?;
        image_io::save_pfm(&dir.join("recon.pfm"), &recon_img)?;
        let rel = rpdhg_core::vec::dist(&recon, truth) / rpdhg_core::vec::norm(truth);
        return Ok((Some(rel), zf));
    }
    let mut csv = String::new();
    match &inst.truth {
        Some(truth) => {
            csv.push_str("index,truth,data,x\n");
            for (i, ((t, b), v)) in truth.iter().zip(&inst.data).zip(x).enumerate() {
                let _ = writeln!(csv, "{i},{t},{b},{v}");
            }
        }
        None => {
            csv.push_str("index,data,x\n");
            for (i, (b, v)) in inst.data.iter().zip(x).enumerate() {
                let _ = writeln!(csv, "{i},{b},{v}");
            }
        }
    }
    let p = dir.join("solution.csv");
    std::fs::write(&p, csv).map_err(|e| CliError::io(&p, e))?;
    Ok((None, None))
}

/// Moves every staged entry into `out`, replacing same-named entries.
fn promote(staging: &Path, out: &Path) -> Result<()> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let entries = std::fs::read_dir(staging).map_err(|e| CliError::io(staging, e))?;
    for entry in entries {
        let entry = entry.map_err(|e| CliError::io(staging, e))?;
        let target = out.join(entry.file_name());
        if target.is_dir() {
            std::fs::remove_dir_all(&target).map_err(|e| CliError::io(&target, e))?;
        } else if target.exists() {
            std::fs::remove_file(&target).map_err(|e| CliError::io(&target, e))?;
        }
        std::fs::rename(entry.path(), &target).map_err(|e| CliError::io(&target, e))?;
    }
    Ok(())
}
