use alloc::format;
use alloc::vec::Vec;
#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;

use super::{conj_prox, Iteration, SaddleProblem, SolverConfig, SolverKind, StepReport};
use crate::linops::op_norm_estimate;
use crate::{Error, Result};

const NORM_ITERS: usize = 200;

/// Fixed-step PDHG with relaxation `rho`:
/// `x_bar = prox_{tau f}(x - tau A* z)`,
/// `z_bar = prox_{sigma g*}(z + sigma A(2 x_bar - x))`,
/// `(x, z) += rho ((x_bar, z_bar) - (x, z))`.
pub struct Pdhg {
    prob: SaddleProblem,
    tau: f64,
    sigma: f64,
    rho: f64,
    x: Vec<f64>,
    z: Vec<f64>,
}

impl Pdhg {
    pub fn new(prob: SaddleProblem, cfg: SolverConfig) -> Result<Self> {
        let norm = op_norm_estimate(&prob.a, NORM_ITERS, cfg.seed)?;
        let default = if norm > 0.0 { 0.99 / norm } else { 1.0 };
        let tau = cfg.pdhg_tau.unwrap_or(default);
        let sigma = cfg.pdhg_sigma.unwrap_or(default);
        if tau * sigma * norm * norm > 1.0 {
            return Err(Error::Config(format!(
                "pdhg steps violate tau*sigma*||A||^2 <= 1: tau = {tau:e}, sigma = {sigma:e}, ||A|| ~ {norm:e}"
            )));
        }
        let x = alloc::vec![0.0; prob.primal_len()];
        let z = alloc::vec![0.0; prob.dual_len()];
        Ok(Pdhg { prob, tau, sigma, rho: cfg.pdhg_rho, x, z })
    }

    pub fn with_start(mut self, x: Vec<f64>, z: Vec<f64>) -> Result<Self> {
        if x.len() != self.x.len() {
            return Err(Error::dim("pdhg start x", self.x.len(), x.len()));
        }
        if z.len() != self.z.len() {
            return Err(Error::dim("pdhg start z", self.z.len(), z.len()));
        }
        self.x = x;
        self.z = z;
        Ok(self)
    }

    pub fn steps(&self) -> (f64, f64) {
        (self.tau, self.sigma)
    }
}

impl Iteration for Pdhg {
    fn kind(&self) -> SolverKind {
        SolverKind::Pdhg
    }

    fn step(&mut self) -> Result<StepReport> {
        let (tau, sigma, rho) = (self.tau, self.sigma, self.rho);
        let atz = self.prob.a.adjoint_apply(&self.z)?;
        let v: Vec<f64> = self.x.iter().zip(&atz).map(|(x, a)| x - tau * a).collect();
        let x_bar = self.prob.f.prox(tau, &v)?;
        let ext: Vec<f64> = x_bar.iter().zip(&self.x).map(|(b, x)| 2.0 * b - x).collect();
        let mut w = self.prob.a.apply(&ext)?;
        for (wi, zi) in w.iter_mut().zip(&self.z) {
            *wi = zi + sigma * *wi;
        }
        let z_bar = conj_prox(&self.prob, sigma, &w)?;
        let mut disp = 0.0;
        for (x, b) in self.x.iter_mut().zip(&x_bar) {
            let d = rho * (b - *x);
            disp += d * d;
            *x += d;
        }
        for (z, b) in self.z.iter_mut().zip(&z_bar) {
            let d = rho * (b - *z);
            disp += d * d;
            *z += d;
        }
        let residual = disp.sqrt();
        Ok(StepReport {
            residual,
            nominal_residual: residual,
            tau,
            alpha: 0.5 * rho,
            inner_backtracks: 0,
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

#[cfg(test)]
mod tests {
    use super::super::testing::small_lasso;
    use super::super::{run_pdhg, NoClock, drive};
    use super::*;
    use crate::linops::{identity, zero, Shape};
    use crate::prox::{l1, sq_l2, ZeroFn};
    use alloc::sync::Arc;
    use alloc::vec;

    #[test]
    fn decoupled_problem_converges_geometrically() {
        let b = vec![1.0, -2.0, 0.5];
        let p = SaddleProblem::new(Arc::new(sq_l2(b.clone())), Arc::new(ZeroFn), zero(Shape::vector(3), Shape::vector(3)));
        let cfg = SolverConfig { pdhg_tau: Some(1.0), pdhg_sigma: Some(1.0), max_iters: 60, ..Default::default() };
        let (sol, trace) = run_pdhg(&p, &cfg).unwrap();
        // x_k - b = (1/2)^k (x_0 - b)
        assert!(crate::vec::dist(&sol.x, &b) < 1e-15 * 1e3);
        let r = &trace.rows;
        assert!((r[10].residual_norm / r[9].residual_norm - 0.5).abs() < 1e-12);
    }

    #[test]
    fn identity_lasso_closed_form() {
        let b = vec![1.0, -2.0];
        let p = SaddleProblem::new(Arc::new(sq_l2(b)), Arc::new(l1(0.3).unwrap()), identity(Shape::vector(2)));
        let cfg = SolverConfig { max_iters: 5000, ..Default::default() };
        let (sol, _) = run_pdhg(&p, &cfg).unwrap();
        assert!((sol.x[0] - 0.7).abs() < 1e-8 && (sol.x[1] + 1.7).abs() < 1e-8);
    }

    #[test]
    fn step_guard_rejects_large_steps() {
        let p = small_lasso(6, 0.3, 7);
        let cfg = SolverConfig { pdhg_tau: Some(1.0), pdhg_sigma: Some(1.0), ..Default::default() };
        assert!(matches!(Pdhg::new(p, cfg), Err(Error::Config(_))));
    }

    #[test]
    fn random_lasso_matches_long_reference() {
        let p = small_lasso(10, 0.3, 8);
        let reference = {
            let cfg = SolverConfig { max_iters: 100_000, ..Default::default() };
            let norm = op_norm_estimate(&p.a, 200, 0).unwrap();
            let cfg = SolverConfig { pdhg_tau: Some(0.5 / norm), pdhg_sigma: Some(0.5 / norm), ..cfg };
            run_pdhg(&p, &cfg).unwrap().0.best_objective
        };
        let cfg = SolverConfig { max_iters: 20_000, ..Default::default() };
        let mut s = Pdhg::new(p.clone(), cfg.clone()).unwrap();
        let (sol, _) = drive(&mut s, &p, &cfg, &NoClock).unwrap();
        assert!((sol.objective - reference).abs() <= 1e-6 * reference.abs());
    }
}
