//! Completion operators `B` with `A A* + B B* = I / theta`, so that
//! `C = [A B]` is a scaled co-isometry.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use num_complex::Complex64;
#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;

use crate::dense::DenseMatrix;
use crate::linops::{
    compose, dense, densify, diagonal, dwt_ortho, idft2_unitary, identity, op_norm_estimate, phase,
    real_part, zero_fill, LinOp, Shape,
};
use crate::{Error, Result};

/// Codomain size above which `build_dense_b` refuses to densify.
pub const DENSE_CODOMAIN_LIMIT: usize = 20_000;
/// Relative jitter added to the diagonal before the Cholesky factorization.
pub const CHOLESKY_JITTER: f64 = 1e-12;
/// Relative tolerance for the probe check of the split identity.
pub const SPLIT_TOL: f64 = 1e-8;
pub const SPLIT_PROBES: usize = 20;
pub const NORM_ITERS: usize = 200;
const NORM_SEED: u64 = 0x6e6f_726d;
const PROBE_SEED: u64 = 0x7370_6c74;

#[derive(Clone, Debug)]
pub struct SplitPair {
    pub a: LinOp,
    pub b: LinOp,
    pub theta: f64,
    /// Worst relative probe residual of `A A* + B B* - I / theta`.
    pub max_residual: f64,
    /// Absolute jitter added to the Cholesky diagonal (zero for matrix-free splits).
    pub jitter: f64,
    /// Diagonal of `Q` for the homodyne split.
    pub q_diag: Option<Vec<f64>>,
}

impl SplitPair {
    /// Verifies the identity on fresh probes and returns the worst relative residual.
    pub fn verify(&self, probes: usize, seed: u64) -> Result<f64> {
        split_residual(&self.a, &self.b, self.theta, probes, seed)
    }
}

/// Worst `||(AA* + BB*)v - v/theta|| / (||v||/theta)` over random probes.
pub fn split_residual(a: &LinOp, b: &LinOp, theta: f64, probes: usize, seed: u64) -> Result<f64> {
    if a.codomain() != b.codomain() {
        return Err(Error::Shape(format!(
            "A maps into {} but B maps into {}",
            a.codomain(),
            b.codomain()
        )));
    }
    let mut rng = crate::rng::seeded(seed);
    let inv = 1.0 / theta;
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let v = crate::rng::normal_vec(&mut rng, a.codomain().len());
        let aa = a.apply(&a.adjoint_apply(&v)?)?;
        let bb = b.apply(&b.adjoint_apply(&v)?)?;
        let err = aa
            .iter()
            .zip(&bb)
            .zip(&v)
            .map(|((p, q), vi)| (p + q - inv * vi).powi(2))
            .sum::<f64>()
            .sqrt();
        worst = worst.max(err / (inv * crate::vec::norm(&v)));
    }
    Ok(worst)
}

fn finish(a: LinOp, b: LinOp, theta: f64, jitter: f64, q_diag: Option<Vec<f64>>) -> Result<SplitPair> {
    let max_residual = split_residual(&a, &b, theta, SPLIT_PROBES, PROBE_SEED)?;
    if !(max_residual <= SPLIT_TOL) {
        return Err(Error::Construction(format!(
            "A A* + B B* deviates from I/theta by {max_residual:e} (tolerance {SPLIT_TOL:e})"
        )));
    }
    Ok(SplitPair { a, b, theta, max_residual, jitter, q_diag })
}

/// `0.9 / ||A||^2` with `||A||` from a fixed-seed power iteration.
pub fn default_theta(a: &LinOp) -> Result<f64> {
    let est = op_norm_estimate(a, NORM_ITERS, NORM_SEED)?;
    if !(est > 0.0) {
        return Err(Error::Parameter(format!(
            "operator {} has zero norm; theta is undefined",
            a.name()
        )));
    }
    Ok(0.9 / (est * est))
}

#[derive(Clone, Copy, Debug, Default)]
pub struct DenseSplitOptions {
    /// Densify even when the codomain exceeds `DENSE_CODOMAIN_LIMIT`.
    pub allow_large: bool,
}

/// `B` as the lower Cholesky factor of `I/theta - A A*`.
pub fn build_dense_b(a: &LinOp, theta: f64, opts: DenseSplitOptions) -> Result<SplitPair> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta must be positive, got {theta}")));
    }
    let m = a.codomain().len();
    if m > DENSE_CODOMAIN_LIMIT && !opts.allow_large {
        return Err(Error::Resource(format!(
            "refusing to densify a {m}-dimensional codomain (limit {DENSE_CODOMAIN_LIMIT}): the \
             dense Cholesky completion needs an m x m matrix and can quickly exceed memory; \
             use a matrix-free split or set the override"
        )));
    }
    let am = densify(a)?;
    let inv = 1.0 / theta;
    let mut gram = am.gram_outer();
    let jitter = CHOLESKY_JITTER * inv;
    let mut target = DenseMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let id = if i == j { inv + jitter } else { 0.0 };
            target.set(i, j, id - gram.get(i, j));
        }
    }
    gram = target;
    let l = gram.cholesky().map_err(|_| {
        Error::Construction(format!(
            "I/theta - A A* is not positive semidefinite: need 1/theta >= ||A||^2, \
             got 1/theta = {inv:e} with theta = {theta:e}"
        ))
    })?;
    let b = dense(l);
    let b = if a.codomain() == b.codomain() {
        b
    } else {
        // `A` may carry a non-vector codomain shape; B acts on the flattened space.
        compose(&[reshape(b.codomain(), a.codomain()), b])?
    };
    finish(a.clone(), b, theta, jitter, None)
}

fn reshape(from: Shape, to: Shape) -> LinOp {
    struct Reshape(Shape, Shape);
    impl crate::linops::LinearMap for Reshape {
        fn domain(&self) -> Shape {
            self.0
        }
        fn codomain(&self) -> Shape {
            self.1
        }
        fn forward(&self, x: &[f64], out: &mut [f64]) {
            out.copy_from_slice(x)
        }
        fn adjoint(&self, y: &[f64], out: &mut [f64]) {
            out.copy_from_slice(y)
        }
        fn name(&self) -> alloc::string::String {
            "reshape".into()
        }
    }
    LinOp::new(Reshape(from, to)).with_norm_bound(1.0)
}

/// Inputs of the homodyne compressed-sensing operator on an `n x m` grid.
#[derive(Clone, Debug)]
pub struct HomodyneSpec<'a> {
    pub rows: usize,
    pub cols: usize,
    /// Grid entries kept by `D` (row-major).
    pub support: &'a [bool],
    /// Real ramp weights `R` (row-major).
    pub ramp: &'a [f64],
    /// Unit-modulus phase estimate `Phi` (row-major).
    pub phase: &'a [Complex64],
    pub levels: usize,
}

impl HomodyneSpec<'_> {
    fn check(&self) -> Result<()> {
        let nm = self.rows * self.cols;
        if self.support.len() != nm {
            return Err(Error::dim("support mask", nm, self.support.len()));
        }
        if self.ramp.len() != nm {
            return Err(Error::dim("ramp", nm, self.ramp.len()));
        }
        if self.phase.len() != nm {
            return Err(Error::dim("phase", nm, self.phase.len()));
        }
        Ok(())
    }

    fn ramp_op(&self) -> Result<LinOp> {
        diagonal(Shape::complex_grid(self.rows, self.cols), self.ramp.to_vec())
    }

    /// `Re ∘ Phi ∘ F^-1`, complex grid to real grid.
    fn synthesis(&self) -> Result<LinOp> {
        let (n, m) = (self.rows, self.cols);
        compose(&[
            real_part(n, m),
            phase(Shape::complex_grid(n, m), self.phase.to_vec())?,
            idft2_unitary(n, m)?,
        ])
    }

    /// `P_Phi = Re ∘ Phi ∘ F^-1 ∘ R ∘ D*`, from support values to a real image.
    pub fn homodyne(&self) -> Result<LinOp> {
        self.check()?;
        compose(&[
            self.synthesis()?,
            self.ramp_op()?,
            zero_fill(self.rows, self.cols, self.support)?,
        ])
    }

    /// `A = Psi ∘ P_Phi`.
    pub fn forward_operator(&self) -> Result<LinOp> {
        compose(&[dwt_ortho(self.rows, self.cols, self.levels)?, self.homodyne()?])
    }

    /// Largest `r^2 d`, which bounds `||A||^2`.
    pub fn max_weight(&self) -> f64 {
        self.support
            .iter()
            .zip(self.ramp)
            .filter(|(d, _)| **d)
            .map(|(_, r)| r * r)
            .fold(0.0, f64::max)
    }
}

/// Matrix-free split `B = Psi ∘ Re ∘ Phi ∘ F^-1 ∘ Q` with the diagonal
/// `Q = (I/theta - R D* D R)^(1/2)`.
pub fn build_mri_b(spec: &HomodyneSpec<'_>, theta: f64) -> Result<SplitPair> {
    spec.check()?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta must be positive, got {theta}")));
    }
    let inv = 1.0 / theta;
    let (n, m) = (spec.rows, spec.cols);
    let mut q = vec![0.0; n * m];
    for (k, qk) in q.iter_mut().enumerate() {
        let w = if spec.support[k] { spec.ramp[k] * spec.ramp[k] } else { 0.0 };
        let diag = inv - w;
        if diag < 0.0 {
            return Err(Error::Construction(format!(
                "Q has a negative diagonal entry at ({}, {}): 1/theta = {inv:e} < r^2 d = {w:e}",
                k / m,
                k % m
            )));
        }
        *qk = diag.sqrt();
    }
    let a = spec.forward_operator()?;
    let b = compose(&[
        dwt_ortho(n, m, spec.levels)?,
        spec.synthesis()?,
        diagonal(Shape::complex_grid(n, m), q.clone())?,
    ])?;
    finish(a, b, theta, 0.0, Some(q))
}

/// `theta = 0.9 / max(r^2 d)` for the homodyne split.
pub fn homodyne_theta(spec: &HomodyneSpec<'_>) -> Result<f64> {
    let w = spec.max_weight();
    if !(w > 0.0) {
        return Err(Error::Parameter("homodyne operator is zero; theta is undefined".into()));
    }
    Ok(0.9 / w)
}

/// Symmetric root `(I/theta - A A*)^(1/2)` for the periodic 2D gradient,
/// applied matrix-free: `A A*` is block circulant, so per DFT frequency it is
/// the rank-one matrix `d d^H` with `d = (e^{2 pi i k/n} - 1, e^{2 pi i l/m} - 1)`.
struct Grad2dRoot {
    n: usize,
    m: usize,
    shape: Shape,
    fft: LinOp,
    // per frequency: d, sqrt(1/theta), sqrt(1/theta - |d|^2)
    d: Vec<(Complex64, Complex64)>,
    s0: f64,
    s1: Vec<f64>,
}

impl crate::linops::LinearMap for Grad2dRoot {
    fn domain(&self) -> Shape {
        self.shape
    }
    fn codomain(&self) -> Shape {
        self.shape
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let nm = self.n * self.m;
        let spectrum = |plane: &[f64]| -> Vec<Complex64> {
            let mut buf = vec![0.0; 2 * nm];
            for (k, v) in plane.iter().enumerate() {
                buf[2 * k] = *v;
            }
            let f = self.fft.apply(&buf).unwrap_or(buf);
            f.chunks_exact(2).map(|c| Complex64::new(c[0], c[1])).collect()
        };
        let mut v0 = spectrum(&x[..nm]);
        let mut v1 = spectrum(&x[nm..]);
        for k in 0..nm {
            let (d0, d1) = self.d[k];
            let dd = d0.norm_sqr() + d1.norm_sqr();
            let (a, b) = (v0[k], v1[k]);
            if dd > 0.0 {
                let proj = (d0.conj() * a + d1.conj() * b) * ((self.s1[k] - self.s0) / dd);
                v0[k] = a * self.s0 + d0 * proj;
                v1[k] = b * self.s0 + d1 * proj;
            } else {
                v0[k] = a * self.s0;
                v1[k] = b * self.s0;
            }
        }
        for (c, v) in [v0, v1].into_iter().enumerate() {
            let buf: Vec<f64> = v.iter().flat_map(|z| [z.re, z.im]).collect();
            let back = self.fft.adjoint_apply(&buf).unwrap_or(buf);
            for k in 0..nm {
                out[c * nm + k] = back[2 * k];
            }
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.forward(y, out)
    }
    fn name(&self) -> alloc::string::String {
        format!("grad2d_root({}x{})", self.n, self.m)
    }
}

/// Matrix-free split for `A = grad2d(n, m)` via the spectral square root.
pub fn build_grad2d_b(a: &LinOp, n: usize, m: usize, theta: f64) -> Result<SplitPair> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta must be positive, got {theta}")));
    }
    let shape = crate::linops::grad2d(n, m)?.codomain();
    if a.codomain() != shape || a.domain() != Shape::grid(n, m) {
        return Err(Error::Shape(format!("{} is not a {n}x{m} periodic gradient", a.name())));
    }
    let inv = 1.0 / theta;
    let tone = |k: usize, len: usize| {
        let w = 2.0 * core::f64::consts::PI * k as f64 / len as f64;
        Complex64::new(w.cos() - 1.0, w.sin())
    };
    let mut d = Vec::with_capacity(n * m);
    let mut s1 = Vec::with_capacity(n * m);
    for k in 0..n {
        for l in 0..m {
            let (d0, d1) = (tone(k, n), tone(l, m));
            let rest = inv - d0.norm_sqr() - d1.norm_sqr();
            if rest < -1e-12 * inv {
                return Err(Error::Construction(format!(
                    "I/theta - A A* is not positive semidefinite at frequency ({k}, {l}): \
                     1/theta = {inv:e} < |d|^2 = {:e}",
                    inv - rest
                )));
            }
            d.push((d0, d1));
            s1.push(rest.max(0.0).sqrt());
        }
    }
    let root = Grad2dRoot { n, m, shape, fft: crate::linops::dft2_unitary(n, m)?, d, s0: inv.sqrt(), s1 };
    finish(a.clone(), LinOp::new(root).with_norm_bound(inv.sqrt()), theta, 0.0, None)
}

/// `B = I / sqrt(theta)` completion for an operator with `A = 0`; used in tests.
pub fn trivial_split(codomain: Shape, theta: f64) -> Result<SplitPair> {
    let a = crate::linops::zero(codomain, codomain);
    let b = crate::linops::scaled(&identity(codomain), 1.0 / theta.sqrt());
    finish(a, b, theta, 0.0, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{adjoint_mismatch, diagonal, zero};

    fn dense_random(n: usize, m: usize, seed: u64) -> LinOp {
        let mut rng = crate::rng::seeded(seed);
        let data = crate::rng::normal_vec(&mut rng, n * m);
        dense(DenseMatrix::from_row_major(n, m, data).unwrap())
    }

    #[test]
    fn identity_half_gives_identity_b() {
        let a = identity(Shape::vector(4));
        let s = build_dense_b(&a, 0.5, DenseSplitOptions::default()).unwrap();
        let bm = densify(&s.b).unwrap();
        assert!(bm.max_abs_diff(&DenseMatrix::identity(4)) < 1e-10);
        assert!(s.max_residual < 1e-11);
    }

    #[test]
    fn zero_operator_gives_identity_b() {
        let a = zero(Shape::vector(3), Shape::vector(3));
        let s = build_dense_b(&a, 1.0, DenseSplitOptions::default()).unwrap();
        assert!(densify(&s.b).unwrap().max_abs_diff(&DenseMatrix::identity(3)) < 1e-10);
    }

    #[test]
    fn random_dense_split_residual() {
        let a = dense_random(10, 10, 5);
        let theta = default_theta(&a).unwrap();
        let s = build_dense_b(&a, theta, DenseSplitOptions::default()).unwrap();
        assert!(s.max_residual <= 1e-8);
        assert!(s.verify(20, 99).unwrap() <= 1e-8);
        assert!(s.jitter > 0.0);
    }

    #[test]
    fn theta_too_large_is_rejected() {
        let a = diagonal(Shape::vector(2), vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            build_dense_b(&a, 1.0, DenseSplitOptions::default()),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn dense_guard() {
        let a = zero(Shape::vector(1), Shape::vector(DENSE_CODOMAIN_LIMIT + 1));
        let err = build_dense_b(&a, 1.0, DenseSplitOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
        assert!(alloc::format!("{err}").contains("memory"));
    }

    #[test]
    fn default_theta_examples() {
        assert!((default_theta(&identity(Shape::vector(5))).unwrap() - 0.9).abs() < 1e-12);
        let d = diagonal(Shape::vector(3), vec![1.0, 2.0, 3.0]).unwrap();
        assert!((default_theta(&d).unwrap() - 0.1).abs() < 1e-10);
        let z = zero(Shape::vector(2), Shape::vector(2));
        assert!(matches!(default_theta(&z), Err(Error::Parameter(_))));
    }

    #[test]
    fn default_theta_matches_svd() {
        let a = dense_random(7, 5, 11);
        let am = densify(&a).unwrap();
        let na = nalgebra::DMatrix::from_row_slice(7, 5, am.as_slice());
        let smax = na.singular_values().max();
        let theta = default_theta(&a).unwrap();
        assert!((theta - 0.9 / (smax * smax)).abs() / theta < 1e-4);
    }

    fn unit_phase(n: usize, m: usize) -> Vec<Complex64> {
        (0..n * m).map(|k| Complex64::from_polar(1.0, 0.3 * k as f64)).collect()
    }

    #[test]
    fn spectral_grad2d_matches_dense() {
        for (n, m) in [(4, 4), (5, 3), (6, 7)] {
            let a = crate::linops::grad2d(n, m).unwrap();
            let theta = default_theta(&a).unwrap();
            let s = build_grad2d_b(&a, n, m, theta).unwrap();
            assert!(s.max_residual < 1e-12);
            assert!(adjoint_mismatch(&s.b, 10, 1).unwrap() < 1e-12);
            let d = build_dense_b(&a, theta, DenseSplitOptions::default()).unwrap();
            // B B* agrees even though the factors differ
            let mut rng = crate::rng::seeded(7);
            let v = crate::rng::normal_vec(&mut rng, 2 * n * m);
            let p = s.b.apply(&s.b.adjoint_apply(&v).unwrap()).unwrap();
            let q = d.b.apply(&d.b.adjoint_apply(&v).unwrap()).unwrap();
            assert!(crate::vec::dist(&p, &q) < 1e-9 * crate::vec::norm(&v));
        }
        let a = crate::linops::grad2d(4, 4).unwrap();
        assert!(matches!(build_grad2d_b(&a, 4, 4, 0.2), Err(Error::Construction(_))));
    }

    #[test]
    fn mri_full_mask_unit_ramp() {
        let (n, m) = (8, 8);
        let support = vec![true; n * m];
        let ramp = vec![1.0; n * m];
        let ph = unit_phase(n, m);
        let spec = HomodyneSpec { rows: n, cols: m, support: &support, ramp: &ramp, phase: &ph, levels: 1 };
        let s = build_mri_b(&spec, 0.5).unwrap();
        assert!(s.q_diag.unwrap().iter().all(|q| (q - 1.0).abs() < 1e-15));
        assert!(s.max_residual < 1e-10);
    }

    #[test]
    fn mri_empty_mask() {
        let (n, m) = (8, 8);
        let support = vec![false; n * m];
        let ramp = vec![1.0; n * m];
        let ph = unit_phase(n, m);
        let spec = HomodyneSpec { rows: n, cols: m, support: &support, ramp: &ramp, phase: &ph, levels: 1 };
        let s = build_mri_b(&spec, 0.5).unwrap();
        assert!(s.q_diag.unwrap().iter().all(|q| (q - 2f64.sqrt()).abs() < 1e-15));
    }

    #[test]
    fn mri_negative_diagonal_reports_location() {
        let support = vec![true; 4];
        let ramp = vec![1.0, 1.0, 2.0, 1.0];
        let ph = vec![Complex64::new(1.0, 0.0); 4];
        let spec = HomodyneSpec { rows: 2, cols: 2, support: &support, ramp: &ramp, phase: &ph, levels: 1 };
        let err = build_mri_b(&spec, 0.5).unwrap_err();
        assert!(alloc::format!("{err}").contains("(1, 0)"));
    }
}
