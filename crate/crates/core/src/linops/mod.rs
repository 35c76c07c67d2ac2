//! Matrix-free linear operators with adjoints.
//!
//! Every vector is a flat `f64` slice described by a [`Shape`]. Complex spaces
//! are stored interleaved, so the plain real dot product is `Re<., .>` and the
//! adjoint of a complex-linear map with respect to it is the usual Hermitian
//! adjoint. This is what lets real and complex spaces sit in one composition
//! (the `Re` map and its zero-imaginary embedding).

use alloc::boxed::Box;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::{Error, Result};

mod basic;
mod complex;
mod compose;
mod diff;
mod fourier;
mod norm;
mod wavelet;

pub use basic::{dense, densify, diagonal, identity, permutation, scaled, zero, Dense, Diagonal};
pub use complex::{phase, real_part, selection, zero_fill, Phase, RealPart, Selection};
pub use compose::{compose, Composed};
pub use diff::{grad1d, grad2d, Grad1d, Grad2d};
pub use fourier::{dft2_unitary, idft2_unitary, Dft2, Fft1d};
pub use norm::op_norm_estimate;
pub use wavelet::{default_levels, dwt_ortho, Dwt2, DB4_LOWPASS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

/// Shape of a vector space: a `rows x cols` grid with `channels` planes
/// (channel-major), over the reals or the complex numbers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub rows: usize,
    pub cols: usize,
    pub channels: usize,
    pub field: Field,
}

impl Shape {
    pub const fn vector(n: usize) -> Self {
        Shape {
            rows: n,
            cols: 1,
            channels: 1,
            field: Field::Real,
        }
    }

    pub const fn complex_vector(n: usize) -> Self {
        Shape {
            rows: n,
            cols: 1,
            channels: 1,
            field: Field::Complex,
        }
    }

    pub const fn grid(rows: usize, cols: usize) -> Self {
        Shape {
            rows,
            cols,
            channels: 1,
            field: Field::Real,
        }
    }

    pub const fn complex_grid(rows: usize, cols: usize) -> Self {
        Shape {
            rows,
            cols,
            channels: 1,
            field: Field::Complex,
        }
    }

    pub const fn with_channels(self, channels: usize) -> Self {
        Shape { channels, ..self }
    }

    pub const fn is_complex(&self) -> bool {
        matches!(self.field, Field::Complex)
    }

    /// Number of scalar entries (real or complex).
    pub const fn entries(&self) -> usize {
        self.rows * self.cols * self.channels
    }

    /// Length of the backing `f64` buffer.
    pub const fn len(&self) -> usize {
        match self.field {
            Field::Real => self.entries(),
            Field::Complex => 2 * self.entries(),
        }
    }

    pub const fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let field = if self.is_complex() { "C" } else { "R" };
        if self.channels == 1 {
            write!(f, "{field}^{}x{}", self.rows, self.cols)
        } else {
            write!(f, "{field}^{}x{}x{}", self.rows, self.cols, self.channels)
        }
    }
}

/// A linear map with a known adjoint.
///
/// `forward` and `adjoint` receive buffers of exactly `domain().len()` and
/// `codomain().len()` (resp. the reverse) and must overwrite `out` entirely.
pub trait LinearMap: Send + Sync {
    fn domain(&self) -> Shape;
    fn codomain(&self) -> Shape;
    fn forward(&self, x: &[f64], out: &mut [f64]);
    fn adjoint(&self, y: &[f64], out: &mut [f64]);
    fn name(&self) -> String;
}

/// Shared handle to an immutable [`LinearMap`], with checked application.
#[derive(Clone)]
pub struct LinOp {
    map: Arc<dyn LinearMap>,
    norm_bound: Option<f64>,
}

impl fmt::Debug for LinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "LinOp({}: {} -> {})",
            self.map.name(),
            self.domain(),
            self.codomain()
        )
    }
}

impl LinOp {
    pub fn new<M: LinearMap + 'static>(map: M) -> Self {
        LinOp {
            map: Arc::new(map),
            norm_bound: None,
        }
    }

    pub fn from_boxed(map: Box<dyn LinearMap>) -> Self {
        LinOp {
            map: Arc::from(map),
            norm_bound: None,
        }
    }

    /// Attaches a known upper bound on the operator norm.
    pub fn with_norm_bound(mut self, bound: f64) -> Self {
        self.norm_bound = Some(bound);
        self
    }

    pub fn norm_bound(&self) -> Option<f64> {
        self.norm_bound
    }

    pub fn domain(&self) -> Shape {
        self.map.domain()
    }

    pub fn codomain(&self) -> Shape {
        self.map.codomain()
    }

    pub fn name(&self) -> String {
        self.map.name()
    }

    /// True if both handles point at the same underlying map.
    pub fn same_as(&self, other: &LinOp) -> bool {
        Arc::ptr_eq(&self.map, &other.map)
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.codomain().zeros();
        self.apply_into(x, &mut out)?;
        Ok(out)
    }

    pub fn apply_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(x, self.domain(), "apply")?;
        if out.len() != self.codomain().len() {
            return Err(Error::dim(
                alloc::format!("{} output", self.name()),
                self.codomain().len(),
                out.len(),
            ));
        }
        self.map.forward(x, out);
        Ok(())
    }

    pub fn adjoint_apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        let mut out = self.domain().zeros();
        self.adjoint_into(y, &mut out)?;
        Ok(out)
    }

    pub fn adjoint_into(&self, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(y, self.codomain(), "adjoint")?;
        if out.len() != self.domain().len() {
            return Err(Error::dim(
                alloc::format!("{} adjoint output", self.name()),
                self.domain().len(),
                out.len(),
            ));
        }
        self.map.adjoint(y, out);
        Ok(())
    }

    /// The adjoint as an operator in its own right.
    pub fn adjoint_op(&self) -> LinOp {
        let op = LinOp::new(AdjointOf(self.clone()));
        match self.norm_bound {
            Some(b) => op.with_norm_bound(b),
            None => op,
        }
    }

    fn check(&self, x: &[f64], shape: Shape, what: &str) -> Result<()> {
        if x.len() != shape.len() {
            return Err(Error::dim(
                alloc::format!("{} {what} ({shape})", self.name()),
                shape.len(),
                x.len(),
            ));
        }
        if !crate::vec::all_finite(x) {
            return Err(Error::NonFinite(alloc::format!("{} {what}", self.name())));
        }
        Ok(())
    }

    pub(crate) fn map(&self) -> &dyn LinearMap {
        &*self.map
    }
}

struct AdjointOf(LinOp);

impl LinearMap for AdjointOf {
    fn domain(&self) -> Shape {
        self.0.codomain()
    }
    fn codomain(&self) -> Shape {
        self.0.domain()
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.0.map().adjoint(x, out)
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.0.map().forward(y, out)
    }
    fn name(&self) -> String {
        alloc::format!("adjoint({})", self.0.name())
    }
}

/// Largest relative violation of `<A x, y> = <x, A* y>` over `probes` random
/// pairs.
pub fn adjoint_mismatch(op: &LinOp, probes: usize, seed: u64) -> Result<f64> {
    let mut rng = crate::rng::seeded(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let x = crate::rng::normal_vec(&mut rng, op.domain().len());
        let y = crate::rng::normal_vec(&mut rng, op.codomain().len());
        let ax = op.apply(&x)?;
        let aty = op.adjoint_apply(&y)?;
        let lhs = crate::vec::dot(&ax, &y);
        let rhs = crate::vec::dot(&x, &aty);
        let scale = crate::vec::norm(&ax) * crate::vec::norm(&y)
            + crate::vec::norm(&x) * crate::vec::norm(&aty);
        let rel = if scale > 0.0 {
            (lhs - rhs).abs() / scale
        } else {
            (lhs - rhs).abs()
        };
        worst = worst.max(rel);
    }
    Ok(worst)
}
