use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;

use super::{conj_prox, Iteration, SaddleProblem, SolverConfig, SolverKind, SolverState, StepReport};
use crate::{Error, Result};

/// The step-size search of one iteration, independent of the relaxation
/// applied afterwards.
#[derive(Clone, Debug)]
pub struct InnerSearch {
    /// `prox_{tau_{k-1} f}(x_{k-1} - tau_{k-1} A* z_{k-1})`.
    pub x_hat: Vec<f64>,
    pub z_bar: Vec<f64>,
    pub atz_bar: Vec<f64>,
    pub tau: f64,
    pub theta: f64,
    pub backtracks: usize,
}

/// Backtracks `tau` from `tau_{k-1} sqrt(1 + theta_{k-1})` by `mu` until
/// `sqrt(beta) tau ||A* z_bar - A* z|| <= delta ||z_bar - z||`.
pub fn inner_search(prob: &SaddleProblem, cfg: &SolverConfig, s: &SolverState) -> Result<InnerSearch> {
    let v: Vec<f64> = s.x.iter().zip(&s.atz).map(|(x, a)| x - s.tau * a).collect();
    let x_hat = prob.f.prox(s.tau, &v)?;
    let sqrt_beta = cfg.beta.sqrt();
    let mut tau = s.tau * (1.0 + s.theta).sqrt();
    let mut backtracks = 0;
    loop {
        let theta = tau / s.tau;
        let x_bar: Vec<f64> = x_hat.iter().zip(&s.x).map(|(h, x)| h + theta * (h - x)).collect();
        let step = cfg.beta * tau;
        let mut w = prob.a.apply(&x_bar)?;
        for (wi, zi) in w.iter_mut().zip(&s.z) {
            *wi = zi + step * *wi;
        }
        let z_bar = conj_prox(prob, step, &w)?;
        // differencing before the adjoint keeps roundoff in A* z out of the test
        let dz = crate::vec::sub(&z_bar, &s.z);
        let atdz = prob.a.adjoint_apply(&dz)?;
        let lhs = sqrt_beta * tau * crate::vec::norm(&atdz);
        let rhs = cfg.delta * crate::vec::norm(&dz);
        if lhs <= rhs {
            let atz_bar = s.atz.iter().zip(&atdz).map(|(a, d)| a + d).collect();
            return Ok(InnerSearch { x_hat, z_bar, atz_bar, tau, theta, backtracks });
        }
        if backtracks == cfg.max_inner_backtracks {
            return Err(Error::LineSearch { backtracks, tau });
        }
        tau *= cfg.mu;
        backtracks += 1;
    }
}

impl InnerSearch {
    /// `x_k = (1 - 2 alpha) x_{k-1} + 2 alpha x_hat` and likewise for `z`.
    pub fn relax(&self, s: &SolverState, alpha: f64) -> SolverState {
        let (a, b) = (1.0 - 2.0 * alpha, 2.0 * alpha);
        let mix = |old: &[f64], new: &[f64]| -> Vec<f64> { old.iter().zip(new).map(|(o, n)| a * o + b * n).collect() };
        SolverState {
            x: mix(&s.x, &self.x_hat),
            z: mix(&s.z, &self.z_bar),
            atz: mix(&s.atz, &self.atz_bar),
            tau: self.tau,
            theta: self.theta,
        }
    }
}

/// One inner line search followed by relaxation with `alpha`.
pub fn malitsky_step(s: &SolverState, prob: &SaddleProblem, cfg: &SolverConfig, alpha: f64) -> Result<(SolverState, usize)> {
    let search = inner_search(prob, cfg, s)?;
    Ok((search.relax(s, alpha), search.backtracks))
}

/// PDHG with the Malitsky-Pock backtracking line search on the primal step.
pub struct PdhgLs {
    prob: SaddleProblem,
    cfg: SolverConfig,
    x: Vec<f64>,
    z: Vec<f64>,
    tau: f64,
    theta: f64,
}

impl PdhgLs {
    pub fn new(prob: SaddleProblem, cfg: SolverConfig) -> Result<Self> {
        let x = alloc::vec![0.0; prob.primal_len()];
        let z = alloc::vec![0.0; prob.dual_len()];
        Ok(PdhgLs { tau: cfg.tau0, theta: cfg.theta0, prob, cfg, x, z })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }
}

impl Iteration for PdhgLs {
    fn kind(&self) -> SolverKind {
        SolverKind::PdhgLs
    }

    fn step(&mut self) -> Result<StepReport> {
        let prob = &self.prob;
        let cfg = &self.cfg;
        let atz = prob.a.adjoint_apply(&self.z)?;
        let v: Vec<f64> = self.x.iter().zip(&atz).map(|(x, a)| x - self.tau * a).collect();
        let x_new = prob.f.prox(self.tau, &v)?;
        let mut tau = self.tau * (1.0 + self.theta).sqrt();
        let mut backtracks = 0;
        let z_new = loop {
            let theta = tau / self.tau;
            let x_bar: Vec<f64> = x_new.iter().zip(&self.x).map(|(n, o)| n + theta * (n - o)).collect();
            let step = cfg.beta * tau;
            let w: Vec<f64> = prob.a.apply(&x_bar)?.iter().zip(&self.z).map(|(ax, z)| z + step * ax).collect();
            let z_new = conj_prox(prob, step, &w)?;
            let dz = crate::vec::sub(&z_new, &self.z);
            let lhs = cfg.beta.sqrt() * tau * crate::vec::norm(&prob.a.adjoint_apply(&dz)?);
            let rhs = cfg.delta * crate::vec::norm(&dz);
            if lhs <= rhs {
                self.theta = theta;
                break z_new;
            }
            if backtracks == cfg.max_inner_backtracks {
                return Err(Error::LineSearch { backtracks, tau });
            }
            tau *= cfg.mu;
            backtracks += 1;
        };
        let residual = (crate::vec::dist(&x_new, &self.x).powi(2) + crate::vec::dist(&z_new, &self.z).powi(2)).sqrt();
        self.x = x_new;
        self.z = z_new;
        self.tau = tau;
        Ok(StepReport {
            residual,
            nominal_residual: residual,
            tau,
            alpha: cfg.alpha_bar,
            inner_backtracks: backtracks,
            outer_trials: 0,
            activated: false,
        })
    }

    fn primal(&self) -> &[f64] {
        &self.x
    }

    fn dual(&self) -> &[f64] {
        &self.z
    }
}
