//! Iterative solvers for `min_x f(x) + g(Ax)`.
//!
//! All four methods share a driver that evaluates the feasible objective,
//! keeps the best iterate, records a [`Trace`] row per iteration and applies
//! the stopping rule `||r_k|| <= rtol ||r_1||` (or the iteration budget).

mod aoi;
mod malitsky;
mod pdhg;
mod rpdhg;

use alloc::boxed::Box;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::bsplit::SplitPair;
use crate::linops::LinOp;
use crate::prox::ProxFn;
use crate::{Error, Result};

pub use aoi::AoiPddr;
pub use malitsky::{inner_search, malitsky_step, InnerSearch, PdhgLs};
pub use pdhg::Pdhg;
pub use rpdhg::{activation_check, ActivationWindow, Rpdhg};

/// `min_x f(x) + g(Ax)`, optionally with a completion `B` of `A`.
#[derive(Clone)]
pub struct SaddleProblem {
    pub f: Arc<dyn ProxFn>,
    pub g: Arc<dyn ProxFn>,
    pub a: LinOp,
    pub split: Option<SplitPair>,
}

impl fmt::Debug for SaddleProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SaddleProblem")
            .field("f", &self.f.label())
            .field("g", &self.g.label())
            .field("a", &self.a)
            .field("split", &self.split.as_ref().map(|s| s.theta))
            .finish()
    }
}

impl SaddleProblem {
    pub fn new(f: Arc<dyn ProxFn>, g: Arc<dyn ProxFn>, a: LinOp) -> Self {
        SaddleProblem { f, g, a, split: None }
    }

    pub fn with_split(mut self, split: SplitPair) -> Result<Self> {
        if !split.a.same_as(&self.a) {
            return Err(Error::Config(
                "split was built for a different operator than the problem's A".into(),
            ));
        }
        self.split = Some(split);
        Ok(self)
    }

    pub fn primal_len(&self) -> usize {
        self.a.domain().len()
    }

    pub fn dual_len(&self) -> usize {
        self.a.codomain().len()
    }

    pub fn require_split(&self) -> Result<&SplitPair> {
        self.split
            .as_ref()
            .ok_or_else(|| Error::Config("this solver needs a split operator B with AA* + BB* = I/theta".into()))
    }

    /// `y = (x - tau A* z, -tau B* z)`.
    pub fn pddr_point(&self, x: &[f64], z: &[f64], tau: f64) -> Result<Vec<f64>> {
        let split = self.require_split()?;
        let mut y = self.a.adjoint_apply(z)?;
        for (yi, xi) in y.iter_mut().zip(x) {
            *yi = xi - tau * *yi;
        }
        y.extend(split.b.adjoint_apply(z)?.into_iter().map(|v| -tau * v));
        Ok(y)
    }
}

/// Displacement `y(after) - y(before)` between two primal-dual points under
/// the mapping `y = (x - tau A* z, -tau B* z)` with a common `tau`.
pub fn pddr_residual(
    prob: &SaddleProblem,
    before: (&[f64], &[f64]),
    after: (&[f64], &[f64]),
    tau: f64,
) -> Result<Vec<f64>> {
    let split = prob.require_split()?;
    let dz = crate::vec::sub(after.1, before.1);
    let mut r = prob.a.adjoint_apply(&dz)?;
    for ((ri, xa), xb) in r.iter_mut().zip(after.0).zip(before.0) {
        *ri = (xa - xb) - tau * *ri;
    }
    r.extend(split.b.adjoint_apply(&dz)?.into_iter().map(|v| -tau * v));
    Ok(r)
}

/// `f(P x) + g(A P x)` where `P` projects onto the constraint set when `f`
/// is an indicator and is the identity otherwise.
pub fn objective_eval_feasible(prob: &SaddleProblem, x: &[f64]) -> Result<f64> {
    let projected;
    let x = if prob.f.is_indicator() {
        projected = prob.f.prox(1.0, x)?;
        &projected[..]
    } else {
        x
    };
    Ok(prob.f.value(x) + prob.g.value(&prob.a.apply(x)?))
}

fn feasible_point(prob: &SaddleProblem, x: &[f64]) -> Result<Vec<f64>> {
    if prob.f.is_indicator() {
        prob.f.prox(1.0, x)
    } else {
        Ok(x.to_vec())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SolverKind {
    Pdhg,
    PdhgLs,
    AoiPddr,
    Rpdhg,
}

impl SolverKind {
    pub const ALL: [SolverKind; 4] = [SolverKind::Pdhg, SolverKind::PdhgLs, SolverKind::AoiPddr, SolverKind::Rpdhg];

    pub fn name(self) -> &'static str {
        match self {
            SolverKind::Pdhg => "pdhg",
            SolverKind::PdhgLs => "pdhg-ls",
            SolverKind::AoiPddr => "aoi-ls",
            SolverKind::Rpdhg => "rpdhg",
        }
    }

    pub fn needs_split(self) -> bool {
        matches!(self, SolverKind::AoiPddr | SolverKind::Rpdhg)
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SolverKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        SolverKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver '{s}' (expected pdhg, pdhg-ls, aoi-ls or rpdhg)")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    /// Initial primal step (line-search methods) and fixed `gamma` for AOI-PDDR.
    pub tau0: f64,
    /// Dual-to-primal step ratio `sigma / tau`.
    pub beta: f64,
    pub delta: f64,
    pub mu: f64,
    /// Outer acceptance margin.
    pub eps: f64,
    /// Activation threshold on consecutive residual ratios.
    pub eps_hat: f64,
    pub alpha_bar: f64,
    pub alpha_max: f64,
    /// `theta_0 = tau_0 / tau_{-1}` for the first inner search.
    pub theta0: f64,
    pub max_iters: usize,
    pub max_inner_backtracks: usize,
    pub max_outer_trials: usize,
    pub rtol: f64,
    /// Fixed steps for baseline PDHG; `0.99 / ||A||` when unset.
    pub pdhg_tau: Option<f64>,
    pub pdhg_sigma: Option<f64>,
    /// Baseline PDHG relaxation `rho` in `(0, 2)`.
    pub pdhg_rho: f64,
    /// Seed of the power iteration used for `||A||`.
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tau0: 1.0,
            beta: 1.0,
            delta: 0.99,
            mu: 0.7,
            eps: 0.01,
            eps_hat: 0.05,
            alpha_bar: 0.5,
            alpha_max: 8.0,
            theta0: 1.0,
            max_iters: 1000,
            max_inner_backtracks: 100,
            max_outer_trials: 50,
            rtol: 0.0,
            pdhg_tau: None,
            pdhg_sigma: None,
            pdhg_rho: 1.0,
            seed: 0,
        }
    }
}

fn open_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must lie in (0, 1), got {v}")))
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::Config(format!("{name} must be positive, got {v}")))
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        positive("tau0", self.tau0)?;
        positive("beta", self.beta)?;
        positive("theta0", self.theta0)?;
        open_unit("delta", self.delta)?;
        open_unit("mu", self.mu)?;
        open_unit("eps", self.eps)?;
        open_unit("eps_hat", self.eps_hat)?;
        positive("alpha_bar", self.alpha_bar)?;
        positive("alpha_max", self.alpha_max)?;
        if self.alpha_bar > self.alpha_max {
            return Err(Error::Config(format!(
                "alpha_bar = {} exceeds alpha_max = {}",
                self.alpha_bar, self.alpha_max
            )));
        }
        if self.max_iters == 0 || self.max_inner_backtracks == 0 || self.max_outer_trials == 0 {
            return Err(Error::Config("iteration caps must be at least 1".into()));
        }
        if !(self.rtol >= 0.0 && self.rtol.is_finite()) {
            return Err(Error::Config(format!("rtol must be >= 0, got {}", self.rtol)));
        }
        if let Some(t) = self.pdhg_tau {
            positive("pdhg tau", t)?;
        }
        if let Some(s) = self.pdhg_sigma {
            positive("pdhg sigma", s)?;
        }
        if !(self.pdhg_rho > 0.0 && self.pdhg_rho < 2.0) {
            return Err(Error::Config(format!("pdhg relaxation must lie in (0, 2), got {}", self.pdhg_rho)));
        }
        Ok(())
    }
}

/// Primal-dual iterate with the cached `A* z` and the step history.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverState {
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub atz: Vec<f64>,
    pub tau: f64,
    /// `tau_k / tau_{k-1}`.
    pub theta: f64,
}

impl SolverState {
    pub fn new(prob: &SaddleProblem, x: Vec<f64>, z: Vec<f64>, tau: f64, theta: f64) -> Result<Self> {
        if x.len() != prob.primal_len() {
            return Err(Error::dim("initial primal point", prob.primal_len(), x.len()));
        }
        let atz = prob.a.adjoint_apply(&z)?;
        Ok(SolverState { x, z, atz, tau, theta })
    }

    pub fn zeros(prob: &SaddleProblem, tau: f64, theta: f64) -> Result<Self> {
        Self::new(prob, vec![0.0; prob.primal_len()], vec![0.0; prob.dual_len()], tau, theta)
    }

    /// The PDDR-space point `y = (x - tau A* z, -tau B* z)`.
    pub fn pddr_point(&self, prob: &SaddleProblem) -> Result<Vec<f64>> {
        prob.pddr_point(&self.x, &self.z, self.tau)
    }
}

/// What one iteration of a solver reports to the driver.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub residual: f64,
    pub nominal_residual: f64,
    pub tau: f64,
    pub alpha: f64,
    pub inner_backtracks: usize,
    pub outer_trials: usize,
    pub activated: bool,
}

/// A steppable solver.
pub trait Iteration {
    fn kind(&self) -> SolverKind;
    fn step(&mut self) -> Result<StepReport>;
    /// Current primal estimate `x_k`.
    fn primal(&self) -> &[f64];
    /// Current dual estimate `z_k`.
    fn dual(&self) -> &[f64];
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub objective: f64,
    pub best_objective: f64,
    pub residual_norm: f64,
    /// Residual of the nominal (`alpha_bar`) step, for auditing accepted trials.
    pub nominal_residual: f64,
    pub tau: f64,
    /// Accepted relaxation in averaged-operator units (`rho = 2 alpha`).
    pub alpha: f64,
    pub inner_backtracks: usize,
    pub outer_trials: usize,
    pub activated: bool,
    pub elapsed_ms: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trace {
    pub solver: SolverKind,
    pub alpha_bar: f64,
    pub eps: f64,
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Rows whose accepted `alpha` exceeds `alpha_bar` but whose residual does
    /// not satisfy `||r|| <= (1 - eps) ||r_bar||`.
    pub fn contraction_violations(&self) -> Vec<usize> {
        self.rows
            .iter()
            .filter(|r| r.alpha > self.alpha_bar && !(r.residual_norm <= (1.0 - self.eps) * r.nominal_residual))
            .map(|r| r.iter)
            .collect()
    }

    pub fn max_inner_backtracks(&self) -> usize {
        self.rows.iter().map(|r| r.inner_backtracks).max().unwrap_or(0)
    }

    /// First iteration whose best objective is within `rel` of `reference`.
    pub fn iterations_to(&self, reference: f64, rel: f64) -> Option<usize> {
        let tol = rel * reference.abs().max(f64::MIN_POSITIVE);
        self.rows.iter().find(|r| r.best_objective - reference <= tol).map(|r| r.iter)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Solution {
    /// Final primal iterate, projected onto the constraint set when there is one.
    pub x: Vec<f64>,
    pub z: Vec<f64>,
    pub objective: f64,
    /// Feasible primal point with the lowest objective seen.
    pub best_x: Vec<f64>,
    pub best_objective: f64,
    pub iterations: usize,
}

/// Source of elapsed wall-clock time for trace rows.
pub trait Clock {
    fn elapsed_ms(&self) -> f64;
}

/// Reports zero elapsed time.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn elapsed_ms(&self) -> f64 {
        0.0
    }
}

pub fn build(kind: SolverKind, prob: &SaddleProblem, cfg: &SolverConfig) -> Result<Box<dyn Iteration>> {
    cfg.validate()?;
    Ok(match kind {
        SolverKind::Pdhg => Box::new(Pdhg::new(prob.clone(), cfg.clone())?),
        SolverKind::PdhgLs => Box::new(PdhgLs::new(prob.clone(), cfg.clone())?),
        SolverKind::AoiPddr => Box::new(AoiPddr::new(prob.clone(), cfg.clone())?),
        SolverKind::Rpdhg => Box::new(Rpdhg::new(prob.clone(), cfg.clone())?),
    })
}

/// Runs a solver until the budget or the residual tolerance is reached.
pub fn drive(
    solver: &mut dyn Iteration,
    prob: &SaddleProblem,
    cfg: &SolverConfig,
    clock: &dyn Clock,
) -> Result<(Solution, Trace)> {
    let mut trace = Trace { solver: solver.kind(), alpha_bar: cfg.alpha_bar, eps: cfg.eps, rows: Vec::new() };
    let mut best_objective = f64::INFINITY;
    let mut best_x = feasible_point(prob, solver.primal())?;
    let mut first_residual = None;
    for iter in 1..=cfg.max_iters {
        let rep = solver.step()?;
        let x = solver.primal();
        if !crate::vec::all_finite(x) || !crate::vec::all_finite(solver.dual()) || rep.residual.is_nan() {
            return Err(Error::NonFinite(format!("{} iterate at iteration {iter}", solver.kind())));
        }
        let objective = objective_eval_feasible(prob, x)?;
        if objective < best_objective {
            best_objective = objective;
            best_x = feasible_point(prob, x)?;
        }
        trace.rows.push(TraceRow {
            iter,
            objective,
            best_objective,
            residual_norm: rep.residual,
            nominal_residual: rep.nominal_residual,
            tau: rep.tau,
            alpha: rep.alpha,
            inner_backtracks: rep.inner_backtracks,
            outer_trials: rep.outer_trials,
            activated: rep.activated,
            elapsed_ms: clock.elapsed_ms(),
        });
        let r0 = *first_residual.get_or_insert(rep.residual);
        if rep.residual <= cfg.rtol * r0 {
            break;
        }
    }
    let x = feasible_point(prob, solver.primal())?;
    let objective = objective_eval_feasible(prob, &x)?;
    let sol = Solution {
        x,
        z: solver.dual().to_vec(),
        objective,
        best_x,
        best_objective,
        iterations: trace.rows.len(),
    };
    Ok((sol, trace))
}

pub fn solve(
    kind: SolverKind,
    prob: &SaddleProblem,
    cfg: &SolverConfig,
    clock: &dyn Clock,
) -> Result<(Solution, Trace)> {
    let mut solver = build(kind, prob, cfg)?;
    drive(&mut *solver, prob, cfg, clock)
}

pub fn run_pdhg(prob: &SaddleProblem, cfg: &SolverConfig) -> Result<(Solution, Trace)> {
    solve(SolverKind::Pdhg, prob, cfg, &NoClock)
}

pub fn run_pdhg_ls(prob: &SaddleProblem, cfg: &SolverConfig) -> Result<(Solution, Trace)> {
    solve(SolverKind::PdhgLs, prob, cfg, &NoClock)
}

pub fn run_aoi_pddr(prob: &SaddleProblem, cfg: &SolverConfig) -> Result<(Solution, Trace)> {
    solve(SolverKind::AoiPddr, prob, cfg, &NoClock)
}

pub fn run_rpdhg(prob: &SaddleProblem, cfg: &SolverConfig) -> Result<(Solution, Trace)> {
    solve(SolverKind::Rpdhg, prob, cfg, &NoClock)
}

pub(crate) fn conj_prox(prob: &SaddleProblem, step: f64, v: &[f64]) -> Result<Vec<f64>> {
    let mut out = vec![0.0; v.len()];
    crate::prox::conjugate_prox(&*prob.g, step, v, &mut out)?;
    Ok(out)
}
