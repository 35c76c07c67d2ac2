use alloc::vec::Vec;

use super::{conj_prox, Iteration, SaddleProblem, SolverConfig, SolverKind, StepReport};
use crate::Result;

/// Evaluation of the PDDR operator at one point.
#[derive(Clone, Debug)]
struct Eval {
    /// `S y - y`.
    r: Vec<f64>,
    norm: f64,
    x: Vec<f64>,
    z: Vec<f64>,
}

/// Averaged-operator line search on primal-dual Douglas-Rachford applied to
/// the lifted problem `f(x) + delta_0(u) + g(Ax + Bu)`, with fixed
/// `gamma = tau0` and `sigma = theta / gamma`.
pub struct AoiPddr {
    prob: SaddleProblem,
    cfg: SolverConfig,
    gamma: f64,
    sigma: f64,
    y: Vec<f64>,
    current: Eval,
}

impl AoiPddr {
    pub fn new(prob: SaddleProblem, cfg: SolverConfig) -> Result<Self> {
        let theta = prob.require_split()?.theta;
        let gamma = cfg.tau0;
        let sigma = theta / gamma;
        let n = prob.primal_len() + prob.require_split()?.b.domain().len();
        let y = alloc::vec![0.0; n];
        Self::with_start(prob, cfg, gamma, sigma, y)
    }

    fn with_start(prob: SaddleProblem, cfg: SolverConfig, gamma: f64, sigma: f64, y: Vec<f64>) -> Result<Self> {
        let mut s = AoiPddr {
            prob,
            cfg,
            gamma,
            sigma,
            y,
            current: Eval { r: Vec::new(), norm: 0.0, x: Vec::new(), z: Vec::new() },
        };
        s.current = s.eval(&s.y)?;
        Ok(s)
    }

    /// Starts from the PDDR image of a primal-dual pair.
    pub fn from_primal_dual(prob: SaddleProblem, cfg: SolverConfig, x: &[f64], z: &[f64]) -> Result<Self> {
        let theta = prob.require_split()?.theta;
        let gamma = cfg.tau0;
        let y = prob.pddr_point(x, z, gamma)?;
        Self::with_start(prob, cfg, gamma, theta / gamma, y)
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `T y = x~ - gamma C* prox_{sigma g*}(sigma C (2 x~ - y))` with
    /// `x~ = (prox_{gamma f}(y_1), 0)`; returns `S y - y = 2 (T y - y)`.
    fn eval(&self, y: &[f64]) -> Result<Eval> {
        let prob = &self.prob;
        let b = &prob.require_split()?.b;
        let n = prob.primal_len();
        let (y1, y2) = y.split_at(n);
        let x = prob.f.prox(self.gamma, y1)?;
        let ext: Vec<f64> = x.iter().zip(y1).map(|(xi, yi)| 2.0 * xi - yi).collect();
        let neg_y2: Vec<f64> = y2.iter().map(|v| -v).collect();
        let mut v = prob.a.apply(&ext)?;
        for (vi, bi) in v.iter_mut().zip(b.apply(&neg_y2)?) {
            *vi = self.sigma * (*vi + bi);
        }
        let z = conj_prox(prob, self.sigma, &v)?;
        let atz = prob.a.adjoint_apply(&z)?;
        let btz = b.adjoint_apply(&z)?;
        let mut r = Vec::with_capacity(y.len());
        for i in 0..n {
            r.push(2.0 * (x[i] - self.gamma * atz[i] - y1[i]));
        }
        for (yi, bi) in y2.iter().zip(&btz) {
            r.push(2.0 * (-self.gamma * bi - yi));
        }
        let norm = crate::vec::norm(&r);
        Ok(Eval { r, norm, x, z })
    }

    fn moved(&self, alpha: f64) -> Vec<f64> {
        self.y.iter().zip(&self.current.r).map(|(y, r)| y + alpha * r).collect()
    }
}

impl Iteration for AoiPddr {
    fn kind(&self) -> SolverKind {
        SolverKind::AoiPddr
    }

    fn step(&mut self) -> Result<StepReport> {
        let cfg = self.cfg.clone();
        let y_bar = self.moved(cfg.alpha_bar);
        let nominal = self.eval(&y_bar)?;
        let mut accepted = None;
        let mut trials = 0;
        let mut alpha = cfg.alpha_max;
        while alpha > cfg.alpha_bar && trials < cfg.max_outer_trials {
            trials += 1;
            let y = self.moved(alpha);
            let e = self.eval(&y)?;
            if e.norm <= (1.0 - cfg.eps) * nominal.norm {
                accepted = Some((y, e, alpha));
                break;
            }
            alpha *= cfg.mu;
        }
        let nominal_residual = nominal.norm;
        let (y, e, alpha) = accepted.unwrap_or((y_bar, nominal, cfg.alpha_bar));
        self.y = y;
        self.current = e;
        Ok(StepReport {
            residual: self.current.norm,
            nominal_residual,
            tau: self.gamma,
            alpha,
            inner_backtracks: 0,
            outer_trials: trials,
            activated: true,
        })
    }

    fn primal(&self) -> &[f64] {
        &self.current.x
    }

    fn dual(&self) -> &[f64] {
        &self.current.z
    }
}
