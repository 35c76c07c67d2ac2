use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;
use rand::Rng;

use super::{params, validate, ProblemInstance, ProblemKind};
use crate::bsplit::{build_dense_b, build_grad2d_b, default_theta, DenseSplitOptions};
use crate::linops::{grad1d, grad2d};
use crate::prox::{l1, l21, sq_l2};
use crate::solvers::SaddleProblem;
use crate::{Error, Result};

/// `0.5 ||x - b||^2 + lambda ||D x||_1` for a noisy step signal with
/// `num_segs` plateaus of length `len_segs` at random integer levels in `[-5, 5]`.
pub fn gen_tv1d(num_segs: usize, len_segs: usize, sigma: f64, lambda: f64, seed: u64) -> Result<ProblemInstance> {
    if num_segs == 0 || len_segs == 0 {
        return Err(Error::Parameter(format!(
            "tv1d needs num_segs, len_segs >= 1, got {num_segs} and {len_segs}"
        )));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("noise level must be >= 0, got {sigma}")));
    }
    let n = num_segs * len_segs;
    if n < 2 {
        return Err(Error::Parameter("tv1d needs at least two samples".into()));
    }
    let mut rng = crate::rng::seeded(seed);
    let levels: Vec<f64> = (0..num_segs).map(|_| rng.random_range(-5i32..=5) as f64).collect();
    let truth: Vec<f64> = (0..n).map(|i| levels[i / len_segs]).collect();
    let noise = crate::rng::normal_vec(&mut rng, n);
    let b: Vec<f64> = truth.iter().zip(&noise).map(|(t, e)| t + sigma * e).collect();
    let a = grad1d(n)?;
    let theta = default_theta(&a)?;
    let split = build_dense_b(&a, theta, DenseSplitOptions::default())?;
    let problem = SaddleProblem::new(Arc::new(sq_l2(b.clone())), Arc::new(l1(lambda)?), a).with_split(split)?;
    validate(&problem)?;
    Ok(ProblemInstance {
        kind: ProblemKind::Tv1d,
        problem,
        truth: Some(truth),
        data: b,
        grid: None,
        params: params(&[
            ("num_segs", num_segs as f64),
            ("len_segs", len_segs as f64),
            ("sigma", sigma),
            ("lambda", lambda),
            ("seed", seed as f64),
            ("theta", theta),
        ]),
        mri: None,
    })
}

/// How the completion `B` of the 2D gradient is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SplitMethod {
    /// Dense Cholesky factor of `I/theta - A A*`.
    Dense,
    /// Matrix-free spectral square root.
    Spectral,
    /// Dense up to `AUTO_DENSE_LIMIT` codomain entries, spectral beyond.
    Auto,
}

pub const AUTO_DENSE_LIMIT: usize = 4096;

/// ROF denoising `0.5 ||x - b||^2 + ||grad x||_{2,1}` of `image + sigma * noise`.
pub fn gen_tv2d(
    image: &[f64],
    rows: usize,
    cols: usize,
    sigma: f64,
    seed: u64,
    split: SplitMethod,
) -> Result<ProblemInstance> {
    if image.len() != rows * cols {
        return Err(Error::dim("tv2d image", rows * cols, image.len()));
    }
    if let Some(v) = image.iter().find(|v| !(0.0..=1.0).contains(*v)) {
        return Err(Error::Parameter(format!("tv2d image values must lie in [0, 1], found {v}")));
    }
    if !(sigma >= 0.0 && sigma.is_finite()) {
        return Err(Error::Parameter(format!("noise level must be >= 0, got {sigma}")));
    }
    let mut rng = crate::rng::seeded(seed);
    let noise = crate::rng::normal_vec(&mut rng, rows * cols);
    let b: Vec<f64> = image.iter().zip(&noise).map(|(t, e)| t + sigma * e).collect();
    let a = grad2d(rows, cols)?;
    let theta = default_theta(&a)?;
    let dense = match split {
        SplitMethod::Dense => true,
        SplitMethod::Spectral => false,
        SplitMethod::Auto => a.codomain().len() <= AUTO_DENSE_LIMIT,
    };
    let pair = if dense {
        build_dense_b(&a, theta, DenseSplitOptions::default())?
    } else {
        build_grad2d_b(&a, rows, cols, theta)?
    };
    let problem = SaddleProblem::new(Arc::new(sq_l2(b.clone())), Arc::new(l21(1.0, rows * cols)?), a).with_split(pair)?;
    validate(&problem)?;
    Ok(ProblemInstance {
        kind: ProblemKind::Tv2d,
        problem,
        truth: Some(image.to_vec()),
        data: b,
        grid: Some((rows, cols)),
        params: params(&[
            ("rows", rows as f64),
            ("cols", cols as f64),
            ("sigma", sigma),
            ("seed", seed as f64),
            ("theta", theta),
            ("dense_split", if dense { 1.0 } else { 0.0 }),
        ]),
        mri: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::synthetic_image;
    use crate::solvers::{objective_eval_feasible, run_rpdhg, SolverConfig};

    #[test]
    fn single_segment_is_constant() {
        let inst = gen_tv1d(1, 20, 0.0, 1.0, 1).unwrap();
        let t = inst.truth.unwrap();
        assert!(t.iter().all(|v| *v == t[0]));
        assert_eq!(crate::vec::norm1(&inst.problem.a.apply(&t).unwrap()), 0.0);
    }

    #[test]
    fn zero_noise_gives_truth() {
        let inst = gen_tv1d(4, 10, 0.0, 1.0, 2).unwrap();
        assert_eq!(inst.data, inst.truth.unwrap());
    }

    #[test]
    fn jump_count_bounded() {
        for seed in 0..5 {
            let inst = gen_tv1d(10, 50, 0.5, 1.0, seed).unwrap();
            let t = inst.truth.as_ref().unwrap();
            let jumps = inst.problem.a.apply(t).unwrap().iter().filter(|v| **v != 0.0).count();
            assert!(jumps <= 10);
            assert!(t.iter().all(|v| v.fract() == 0.0 && v.abs() <= 5.0));
        }
    }

    #[test]
    fn tv2d_noiseless_objective_is_tv() {
        let img = synthetic_image(12, 10);
        let inst = gen_tv2d(&img, 12, 10, 0.0, 3, SplitMethod::Dense).unwrap();
        let tv = inst.problem.g.value(&inst.problem.a.apply(&img).unwrap());
        assert!((objective_eval_feasible(&inst.problem, &img).unwrap() - tv).abs() < 1e-12);
    }

    #[test]
    fn tv2d_constant_image_is_optimal() {
        let img = alloc::vec![0.4; 64];
        let inst = gen_tv2d(&img, 8, 8, 0.0, 3, SplitMethod::Spectral).unwrap();
        assert_eq!(objective_eval_feasible(&inst.problem, &img).unwrap(), 0.0);
        let (sol, _) = run_rpdhg(&inst.problem, &SolverConfig { max_iters: 20, ..Default::default() }).unwrap();
        assert!(crate::vec::dist(&sol.x, &img) < 1e-10);
    }

    #[test]
    fn tv2d_denoising_lowers_tv() {
        let (n, m) = (24, 24);
        let img = synthetic_image(n, m);
        let inst = gen_tv2d(&img, n, m, 0.08, 4, SplitMethod::Auto).unwrap();
        let (sol, _) = run_rpdhg(&inst.problem, &SolverConfig { max_iters: 300, ..Default::default() }).unwrap();
        let tv = |x: &[f64]| inst.problem.g.value(&inst.problem.a.apply(x).unwrap());
        assert!(tv(&sol.best_x) <= tv(&inst.data));
    }

    #[test]
    fn tv2d_rejects_out_of_range() {
        assert!(gen_tv2d(&[0.5, 1.5, 0.0, 0.0], 2, 2, 0.1, 0, SplitMethod::Dense).is_err());
    }
}
