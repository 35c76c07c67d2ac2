use alloc::format;
use alloc::sync::Arc;

use super::{params, validate, ProblemInstance, ProblemKind};
use crate::bsplit::{build_dense_b, default_theta, DenseSplitOptions};
use crate::dense::DenseMatrix;
use crate::linops::dense;
use crate::prox::{l1, sq_l2};
use crate::solvers::SaddleProblem;
use crate::{Error, Result};

/// `0.5 ||x - b||^2 + lambda ||A x||_1` with standard normal `A` (`n x n`)
/// and `b`, split by a dense Cholesky completion.
pub fn gen_lasso(n: usize, lambda: f64, seed: u64) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::Parameter(format!("lasso needs n >= 2, got {n}")));
    }
    let mut rng = crate::rng::seeded(seed);
    let a = dense(DenseMatrix::from_row_major(n, n, crate::rng::normal_vec(&mut rng, n * n))?);
    let b = crate::rng::normal_vec(&mut rng, n);
    let theta = default_theta(&a)?;
    let split = build_dense_b(&a, theta, DenseSplitOptions::default())?;
    let problem = SaddleProblem::new(Arc::new(sq_l2(b.clone())), Arc::new(l1(lambda)?), a).with_split(split)?;
    validate(&problem)?;
    Ok(ProblemInstance {
        kind: ProblemKind::Lasso,
        problem,
        truth: None,
        data: b,
        grid: None,
        params: params(&[("n", n as f64), ("lambda", lambda), ("seed", seed as f64), ("theta", theta)]),
        mri: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solvers::{run_rpdhg, SolverConfig};

    #[test]
    fn seeded_reproducibility() {
        let a = gen_lasso(2, 1.0, 3).unwrap();
        let b = gen_lasso(2, 1.0, 3).unwrap();
        assert_eq!(a.data, b.data);
        let x = [0.3, -0.7];
        assert_eq!(a.problem.a.apply(&x).unwrap(), b.problem.a.apply(&x).unwrap());
        assert_ne!(gen_lasso(2, 1.0, 4).unwrap().data, a.data);
        assert!(gen_lasso(1, 1.0, 0).is_err());
    }

    #[test]
    fn huge_lambda_kills_ax() {
        let inst = gen_lasso(8, 1e6, 5).unwrap();
        let (sol, _) = run_rpdhg(&inst.problem, &SolverConfig { max_iters: 3000, ..Default::default() }).unwrap();
        let ax = inst.problem.a.apply(&sol.best_x).unwrap();
        let ab = inst.problem.a.apply(&inst.data).unwrap();
        assert!(crate::vec::norm1(&ax) <= 1e-6 * crate::vec::norm1(&ab));
    }
}
