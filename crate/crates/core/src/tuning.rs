//! Grid search over the single step parameter of each baseline solver.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;

use crate::linops::op_norm_estimate;
use crate::solvers::{solve, NoClock, SaddleProblem, SolverConfig, SolverKind};
use crate::{Error, Result};

/// Search grid and per-candidate iteration budget.
#[derive(Clone, Debug, PartialEq)]
pub struct TuningGrid {
    pub values: Vec<f64>,
    pub iters: usize,
}

impl TuningGrid {
    /// `points` values spaced evenly in `log10` over `[lo, hi]`.
    pub fn log_spaced(lo: f64, hi: f64, points: usize, iters: usize) -> Result<Self> {
        if !(lo > 0.0 && hi >= lo && points > 0) {
            return Err(Error::Parameter(alloc::format!("bad tuning grid [{lo}, {hi}] with {points} points")));
        }
        let (a, b) = (lo.log10(), hi.log10());
        let values = (0..points)
            .map(|i| if points == 1 { lo } else { 10f64.powf(a + (b - a) * i as f64 / (points - 1) as f64) })
            .collect();
        Ok(TuningGrid { values, iters })
    }
}

impl Default for TuningGrid {
    /// `10^-2 .. 10^2` in 9 points, 300 iterations each.
    fn default() -> Self {
        TuningGrid::log_spaced(1e-2, 1e2, 9, 300).unwrap()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TuningResult {
    pub kind: SolverKind,
    /// Winning grid value, `None` for solvers that take no tuning.
    pub value: Option<f64>,
    pub config: SolverConfig,
    /// Best feasible objective reached by the winner within the budget.
    pub objective: f64,
    /// `(value, objective)` per candidate; failed candidates are `None`.
    pub scores: Vec<(f64, Option<f64>)>,
}

/// Applies a grid value to the knob of `kind`:
/// PDHG gets `tau = v` and `sigma = 0.99 / (v ||A||^2)`,
/// PDHG-LS gets `tau_0 = v`, AOI-PDDR gets `gamma = v`.
pub fn configure(kind: SolverKind, base: &SolverConfig, value: f64, norm: f64) -> SolverConfig {
    let mut cfg = base.clone();
    match kind {
        SolverKind::Pdhg => {
            cfg.pdhg_tau = Some(value);
            cfg.pdhg_sigma = Some(if norm > 0.0 { 0.99 / (value * norm * norm) } else { value });
        }
        SolverKind::PdhgLs | SolverKind::AoiPddr => cfg.tau0 = value,
        SolverKind::Rpdhg => {}
    }
    cfg
}

/// Runs every grid value for `grid.iters` iterations and keeps the one with
/// the lowest best feasible objective. rPDHG is returned untouched.
pub fn tune(kind: SolverKind, prob: &SaddleProblem, base: &SolverConfig, grid: &TuningGrid) -> Result<TuningResult> {
    let mut trial = base.clone();
    trial.max_iters = grid.iters;
    if kind == SolverKind::Rpdhg {
        let (sol, _) = solve(kind, prob, &trial, &NoClock)?;
        return Ok(TuningResult { kind, value: None, config: base.clone(), objective: sol.best_objective, scores: Vec::new() });
    }
    let norm = if kind == SolverKind::Pdhg { op_norm_estimate(&prob.a, 200, base.seed)? } else { 0.0 };
    let mut scores = Vec::with_capacity(grid.values.len());
    let mut best: Option<(f64, f64)> = None;
    for &v in &grid.values {
        let cfg = configure(kind, &trial, v, norm);
        let score = match solve(kind, prob, &cfg, &NoClock) {
            Ok((sol, _)) if sol.best_objective.is_finite() => Some(sol.best_objective),
            Ok(_) => None,
            Err(Error::Config(msg)) => return Err(Error::Config(msg)),
            Err(_) => None,
        };
        if let Some(obj) = score {
            if best.is_none_or(|(_, b)| obj < b) {
                best = Some((v, obj));
            }
        }
        scores.push((v, score));
    }
    let (value, objective) = best.ok_or_else(|| Error::Parameter("every tuning candidate failed".into()))?;
    Ok(TuningResult { kind, value: Some(value), config: configure(kind, base, value, norm), objective, scores })
}
