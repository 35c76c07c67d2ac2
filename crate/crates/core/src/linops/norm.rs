
use super::LinOp;
use crate::{Error, Result};

/// Power iteration on `A*A` from a seeded Gaussian start.
///
/// Returns `||A v||` for the final unit iterate, which never exceeds the true
/// norm. The zero operator yields 0.
pub fn op_norm_estimate(op: &LinOp, iters: usize, seed: u64) -> Result<f64> {
    if iters == 0 {
        return Err(Error::Parameter("power iteration needs iters >= 1".into()));
    }
    let n = op.domain().len();
    if n == 0 {
        return Ok(0.0);
    }
    let mut rng = crate::rng::seeded(seed);
    let mut v = crate::rng::normal_vec(&mut rng, n);
    let nv = crate::vec::norm(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = op.codomain().zeros();
    let mut estimate = 0.0;
    for _ in 0..iters {
        op.apply_into(&v, &mut av)?;
        estimate = crate::vec::norm(&av);
        if estimate == 0.0 {
            return Ok(0.0);
        }
        op.adjoint_into(&av, &mut v)?;
        let nu = crate::vec::norm(&v);
        if nu == 0.0 {
            return Ok(0.0);
        }
        v.iter_mut().for_each(|x| *x /= nu);
    }
    op.apply_into(&v, &mut av)?;
    Ok(crate::vec::norm(&av).max(estimate))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{diagonal, identity, zero, Shape};
    use alloc::vec;

    #[test]
    fn simple_norms() {
        let id = identity(Shape::vector(4));
        assert!((op_norm_estimate(&id, 10, 0).unwrap() - 1.0).abs() < 1e-14);
        let d = diagonal(Shape::vector(3), vec![1.0, 2.0, 3.0]).unwrap();
        assert!((op_norm_estimate(&d, 200, 0).unwrap() - 3.0).abs() < 1e-12);
        let z = zero(Shape::vector(3), Shape::vector(3));
        assert_eq!(op_norm_estimate(&z, 5, 0).unwrap(), 0.0);
        assert!(op_norm_estimate(&id, 0, 0).is_err());
    }
}
