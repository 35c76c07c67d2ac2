use alloc::vec::Vec;

use super::malitsky::inner_search;
use super::{conj_prox, pddr_residual, Iteration, SaddleProblem, SolverConfig, SolverKind, SolverState, StepReport};
use crate::Result;

/// What the activation heuristic looks at before iteration `iteration`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ActivationWindow {
    /// 1-based index of the iteration about to run.
    pub iteration: usize,
    pub prev_activated: bool,
    pub prev_alpha: f64,
    /// `||r_k||`, the residual logged by the previous iteration.
    pub last_residual: Option<f64>,
    /// `||r_{k-1}||`.
    pub prev_residual: Option<f64>,
}

/// Runs the outer search on the first iteration, after an activated
/// iteration that picked `alpha != alpha_bar`, or when the residual ratio
/// `||r_k|| / ||r_{k-1}||` drops below `1 - eps_hat`.
pub fn activation_check(w: &ActivationWindow, cfg: &SolverConfig) -> bool {
    if w.iteration <= 1 {
        return true;
    }
    if w.prev_activated && w.prev_alpha != cfg.alpha_bar {
        return true;
    }
    match (w.last_residual, w.prev_residual) {
        (Some(last), Some(prev)) if prev > 0.0 => last / prev < 1.0 - cfg.eps_hat,
        _ => false,
    }
}

/// Relaxed PDHG: an outer search over the relaxation `alpha` wrapped around
/// the inner step-size search.
pub struct Rpdhg {
    prob: SaddleProblem,
    cfg: SolverConfig,
    state: SolverState,
    window: ActivationWindow,
}

impl Rpdhg {
    pub fn new(prob: SaddleProblem, cfg: SolverConfig) -> Result<Self> {
        prob.require_split()?;
        let state = SolverState::zeros(&prob, cfg.tau0, cfg.theta0)?;
        Ok(Self::from_state(prob, cfg, state))
    }

    pub fn from_state(prob: SaddleProblem, cfg: SolverConfig, state: SolverState) -> Self {
        let window = ActivationWindow {
            iteration: 1,
            prev_activated: false,
            prev_alpha: cfg.alpha_bar,
            last_residual: None,
            prev_residual: None,
        };
        Rpdhg { prob, cfg, state, window }
    }

    pub fn state(&self) -> &SolverState {
        &self.state
    }

    /// One further prox pair from `s` and the norm of the PDDR displacement.
    fn probe(&self, s: &SolverState) -> Result<f64> {
        let (prob, tau) = (&self.prob, s.tau);
        let v: Vec<f64> = s.x.iter().zip(&s.atz).map(|(x, a)| x - tau * a).collect();
        let x_bar = prob.f.prox(tau, &v)?;
        let ext: Vec<f64> = x_bar.iter().zip(&s.x).map(|(b, x)| 2.0 * b - x).collect();
        let step = self.cfg.beta * tau;
        let w: Vec<f64> = prob.a.apply(&ext)?.iter().zip(&s.z).map(|(ax, z)| z + step * ax).collect();
        let z_bar = conj_prox(prob, step, &w)?;
        let r = pddr_residual(prob, (&s.x, &s.z), (&x_bar, &z_bar), tau)?;
        Ok(crate::vec::norm(&r))
    }
}

impl Iteration for Rpdhg {
    fn kind(&self) -> SolverKind {
        SolverKind::Rpdhg
    }

    fn step(&mut self) -> Result<StepReport> {
        let cfg = &self.cfg;
        let search = inner_search(&self.prob, cfg, &self.state)?;
        let nominal = search.relax(&self.state, cfg.alpha_bar);
        let nominal_residual = self.probe(&nominal)?;
        let activated = activation_check(&self.window, cfg);

        let mut accepted = None;
        let mut trials = 0;
        if activated {
            let mut alpha = cfg.alpha_max;
            while alpha > cfg.alpha_bar && trials < cfg.max_outer_trials {
                trials += 1;
                let trial = search.relax(&self.state, alpha);
                let r = self.probe(&trial)?;
                if r <= (1.0 - cfg.eps) * nominal_residual {
                    accepted = Some((trial, r, alpha));
                    break;
                }
                alpha *= cfg.mu;
            }
        }
        let (next, residual, alpha) = accepted.unwrap_or((nominal, nominal_residual, cfg.alpha_bar));
        self.state = next;
        self.window = ActivationWindow {
            iteration: self.window.iteration + 1,
            prev_activated: activated,
            prev_alpha: alpha,
            last_residual: Some(residual),
            prev_residual: self.window.last_residual,
        };
        Ok(StepReport {
            residual,
            nominal_residual,
            tau: self.state.tau,
            alpha,
            inner_backtracks: search.backtracks,
            outer_trials: trials,
            activated,
        })
    }

    fn primal(&self) -> &[f64] {
        &self.state.x
    }

    fn dual(&self) -> &[f64] {
        &self.state.z
    }
}
