use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{LinOp, LinearMap, Shape};
use crate::{Error, Result};

/// `ops[0] ∘ ops[1] ∘ ... ∘ ops[k-1]`: the last operator is applied first.
pub struct Composed {
    ops: Vec<LinOp>,
}

impl LinearMap for Composed {
    fn domain(&self) -> Shape {
        self.ops.last().expect("non-empty composition").domain()
    }
    fn codomain(&self) -> Shape {
        self.ops[0].codomain()
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let mut cur = x.to_vec();
        let last = self.ops.len() - 1;
        for (k, op) in self.ops.iter().rev().enumerate() {
            if k == last {
                op.map().forward(&cur, out);
            } else {
                let mut next = op.codomain().zeros();
                op.map().forward(&cur, &mut next);
                cur = next;
            }
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        let mut cur = y.to_vec();
        let last = self.ops.len() - 1;
        for (k, op) in self.ops.iter().enumerate() {
            if k == last {
                op.map().adjoint(&cur, out);
            } else {
                let mut next = op.domain().zeros();
                op.map().adjoint(&cur, &mut next);
                cur = next;
            }
        }
    }
    fn name(&self) -> String {
        let names: Vec<String> = self.ops.iter().map(|o| o.name()).collect();
        names.join(" ∘ ")
    }
}

/// Composes operators right to left, checking that adjacent shapes chain.
pub fn compose(ops: &[LinOp]) -> Result<LinOp> {
    if ops.is_empty() {
        return Err(Error::Shape("cannot compose an empty operator list".into()));
    }
    for (k, pair) in ops.windows(2).enumerate() {
        if pair[0].domain() != pair[1].codomain() {
            return Err(Error::Shape(format!(
                "composition break between factor {k} ({}, domain {}) and factor {} ({}, codomain {})",
                pair[0].name(),
                pair[0].domain(),
                k + 1,
                pair[1].name(),
                pair[1].codomain()
            )));
        }
    }
    if ops.len() == 1 {
        return Ok(ops[0].clone());
    }
    let bound = ops
        .iter()
        .map(|o| o.norm_bound())
        .try_fold(1.0, |acc, b| b.map(|b| acc * b));
    let op = LinOp::new(Composed { ops: ops.to_vec() });
    Ok(match bound {
        Some(b) => op.with_norm_bound(b),
        None => op,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::DenseMatrix;
    use crate::linops::{adjoint_mismatch, dense, identity};

    #[test]
    fn identity_composition() {
        let id = identity(Shape::vector(3));
        let c = compose(&[id.clone(), id]).unwrap();
        assert_eq!(c.apply(&[1.0, 2.0, 3.0]).unwrap(), alloc::vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn dense_composition_matches_product() {
        let mut rng = crate::rng::seeded(5);
        let a = DenseMatrix::from_row_major(3, 4, crate::rng::normal_vec(&mut rng, 12)).unwrap();
        let b = DenseMatrix::from_row_major(4, 2, crate::rng::normal_vec(&mut rng, 8)).unwrap();
        let ab = a.matmul(&b).unwrap();
        let c = compose(&[dense(a), dense(b)]).unwrap();
        let x = crate::rng::normal_vec(&mut rng, 2);
        assert!(crate::vec::dist(&c.apply(&x).unwrap(), &ab.matvec(&x)) < 1e-13);
        let y = crate::rng::normal_vec(&mut rng, 3);
        assert!(crate::vec::dist(&c.adjoint_apply(&y).unwrap(), &ab.matvec_t(&y)) < 1e-13);
        assert!(adjoint_mismatch(&c, 20, 9).unwrap() < 1e-13);
    }

    #[test]
    fn shape_chain_mismatch() {
        let a = identity(Shape::vector(3));
        let b = identity(Shape::vector(2));
        assert!(matches!(compose(&[a, b]), Err(Error::Shape(_))));
        assert!(compose(&[]).is_err());
    }
}
