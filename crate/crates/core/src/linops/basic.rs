use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{LinOp, LinearMap, Shape};
use crate::dense::DenseMatrix;
use crate::{Error, Result};

struct Identity(Shape);

impl LinearMap for Identity {
    fn domain(&self) -> Shape {
        self.0
    }
    fn codomain(&self) -> Shape {
        self.0
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(x);
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.copy_from_slice(y);
    }
    fn name(&self) -> String {
        "identity".into()
    }
}

pub fn identity(shape: Shape) -> LinOp {
    LinOp::new(Identity(shape)).with_norm_bound(1.0)
}

struct Zero {
    domain: Shape,
    codomain: Shape,
}

impl LinearMap for Zero {
    fn domain(&self) -> Shape {
        self.domain
    }
    fn codomain(&self) -> Shape {
        self.codomain
    }
    fn forward(&self, _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn adjoint(&self, _: &[f64], out: &mut [f64]) {
        out.fill(0.0);
    }
    fn name(&self) -> String {
        "zero".into()
    }
}

pub fn zero(domain: Shape, codomain: Shape) -> LinOp {
    LinOp::new(Zero { domain, codomain }).with_norm_bound(0.0)
}

struct Scaled {
    op: LinOp,
    factor: f64,
}

impl LinearMap for Scaled {
    fn domain(&self) -> Shape {
        self.op.domain()
    }
    fn codomain(&self) -> Shape {
        self.op.codomain()
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.op.map().forward(x, out);
        out.iter_mut().for_each(|v| *v *= self.factor);
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.op.map().adjoint(y, out);
        out.iter_mut().for_each(|v| *v *= self.factor);
    }
    fn name(&self) -> String {
        format!("{} * {}", self.factor, self.op.name())
    }
}

/// `factor * op`
pub fn scaled(op: &LinOp, factor: f64) -> LinOp {
    let bound = op.norm_bound().map(|b| b * factor.abs());
    let out = LinOp::new(Scaled {
        op: op.clone(),
        factor,
    });
    match bound {
        Some(b) => out.with_norm_bound(b),
        None => out,
    }
}

/// Dense matrix acting on real vectors.
pub struct Dense {
    matrix: DenseMatrix,
    domain: Shape,
    codomain: Shape,
}

impl Dense {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearMap for Dense {
    fn domain(&self) -> Shape {
        self.domain
    }
    fn codomain(&self) -> Shape {
        self.codomain
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.matrix.matvec_into(x, out);
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.matrix.matvec_t_into(y, out);
    }
    fn name(&self) -> String {
        format!("dense {}x{}", self.matrix.rows(), self.matrix.cols())
    }
}

pub fn dense(matrix: DenseMatrix) -> LinOp {
    let domain = Shape::vector(matrix.cols());
    let codomain = Shape::vector(matrix.rows());
    LinOp::new(Dense {
        matrix,
        domain,
        codomain,
    })
}

/// Real diagonal weights. On a complex space each weight scales both the real
/// and imaginary part of its entry.
pub struct Diagonal {
    shape: Shape,
    weights: Vec<f64>,
}

impl Diagonal {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        if self.shape.is_complex() {
            for (i, w) in self.weights.iter().enumerate() {
                out[2 * i] = w * x[2 * i];
                out[2 * i + 1] = w * x[2 * i + 1];
            }
        } else {
            for ((o, xi), w) in out.iter_mut().zip(x).zip(&self.weights) {
                *o = w * xi;
            }
        }
    }
}

impl LinearMap for Diagonal {
    fn domain(&self) -> Shape {
        self.shape
    }
    fn codomain(&self) -> Shape {
        self.shape
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.apply(x, out)
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.apply(y, out)
    }
    fn name(&self) -> String {
        "diagonal".into()
    }
}

pub fn diagonal(shape: Shape, weights: Vec<f64>) -> Result<LinOp> {
    if weights.len() != shape.entries() {
        return Err(Error::dim("diagonal weights", shape.entries(), weights.len()));
    }
    let bound = weights
        .iter()
        .map(|w| w.abs())
        .fold(0.0, f64::max);
    Ok(LinOp::new(Diagonal { shape, weights }).with_norm_bound(bound))
}

struct Permutation {
    shape: Shape,
    // out[i] = x[perm[i]]
    perm: Vec<usize>,
}

impl LinearMap for Permutation {
    fn domain(&self) -> Shape {
        self.shape
    }
    fn codomain(&self) -> Shape {
        self.shape
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (o, p) in out.iter_mut().zip(&self.perm) {
            *o = x[*p];
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        for (yi, p) in y.iter().zip(&self.perm) {
            out[*p] = *yi;
        }
    }
    fn name(&self) -> String {
        "permutation".into()
    }
}

/// `(P x)[i] = x[perm[i]]` on a real vector space.
pub fn permutation(perm: Vec<usize>) -> Result<LinOp> {
    let n = perm.len();
    let mut seen = alloc::vec![false; n];
    for &p in &perm {
        if p >= n || seen[p] {
            return Err(Error::Parameter(format!("not a permutation of 0..{n}")));
        }
        seen[p] = true;
    }
    Ok(LinOp::new(Permutation {
        shape: Shape::vector(n),
        perm,
    })
    .with_norm_bound(1.0))
}

/// Materializes `op` as a `codomain.len() x domain.len()` real matrix by
/// applying it to the standard basis.
pub fn densify(op: &LinOp) -> Result<DenseMatrix> {
    let n = op.domain().len();
    let m = op.codomain().len();
    let mut mat = DenseMatrix::zeros(m, n);
    let mut e = alloc::vec![0.0; n];
    let mut col = alloc::vec![0.0; m];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_into(&e, &mut col)?;
        e[j] = 0.0;
        for (i, v) in col.iter().enumerate() {
            mat.set(i, j, *v);
        }
    }
    Ok(mat)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::adjoint_mismatch;
    use alloc::vec;

    #[test]
    fn identity_and_zero() {
        let id = identity(Shape::vector(3));
        assert_eq!(id.apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(id.adjoint_apply(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let z = zero(Shape::vector(3), Shape::vector(2));
        assert_eq!(z.apply(&[1.0, -4.0, 9.0]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn dense_matches_explicit_products() {
        let mut rng = crate::rng::seeded(11);
        let data = crate::rng::normal_vec(&mut rng, 9);
        let x = crate::rng::normal_vec(&mut rng, 3);
        let m = DenseMatrix::from_row_major(3, 3, data.clone()).unwrap();
        let op = dense(m);
        let y = op.apply(&x).unwrap();
        for i in 0..3 {
            let expect: f64 = (0..3).map(|j| data[3 * i + j] * x[j]).sum();
            assert!((y[i] - expect).abs() < 1e-14);
        }
        let w = op.adjoint_apply(&x).unwrap();
        for j in 0..3 {
            let expect: f64 = (0..3).map(|i| data[3 * i + j] * x[i]).sum();
            assert!((w[j] - expect).abs() < 1e-14);
        }
    }

    #[test]
    fn shape_and_finiteness_are_checked() {
        let id = identity(Shape::vector(3));
        assert!(matches!(id.apply(&[1.0, 2.0]), Err(Error::Dimension { .. })));
        assert!(matches!(
            id.apply(&[1.0, f64::NAN, 0.0]),
            Err(Error::NonFinite(_))
        ));
        assert!(matches!(
            id.adjoint_apply(&[1.0, 2.0, 3.0, 4.0]),
            Err(Error::Dimension { .. })
        ));
    }

    #[test]
    fn permutation_and_diagonal_adjoints() {
        let p = permutation(vec![2, 0, 3, 1]).unwrap();
        assert_eq!(p.apply(&[10.0, 11.0, 12.0, 13.0]).unwrap(), vec![12.0, 10.0, 13.0, 11.0]);
        assert!(adjoint_mismatch(&p, 10, 1).unwrap() < 1e-14);
        assert!(permutation(vec![0, 0]).is_err());
        let d = diagonal(Shape::complex_vector(2), vec![2.0, -1.0]).unwrap();
        assert_eq!(d.apply(&[1.0, 1.0, 3.0, -2.0]).unwrap(), vec![2.0, 2.0, -3.0, 2.0]);
        assert!(adjoint_mismatch(&d, 10, 2).unwrap() < 1e-14);
    }

    #[test]
    fn densify_recovers_matrix() {
        let m = DenseMatrix::from_row_major(2, 3, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        let back = densify(&dense(m.clone())).unwrap();
        assert_eq!(back, m);
        let t = densify(&dense(m.clone()).adjoint_op()).unwrap();
        assert_eq!(t, m.transpose());
    }
}
