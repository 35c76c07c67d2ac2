//! Periodic finite differences.

#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;
use alloc::format;
use alloc::string::String;

use super::{LinOp, LinearMap, Shape};
use crate::{Error, Result};

/// Circular backward difference on `R^n`:
/// `(Dx)_0 = x_0 - x_{n-1}`, `(Dx)_i = x_i - x_{i-1}`.
pub struct Grad1d {
    n: usize,
}

impl LinearMap for Grad1d {
    fn domain(&self) -> Shape {
        Shape::vector(self.n)
    }
    fn codomain(&self) -> Shape {
        Shape::vector(self.n)
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let n = self.n;
        out[0] = x[0] - x[n - 1];
        for i in 1..n {
            out[i] = x[i] - x[i - 1];
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        let n = self.n;
        for i in 0..n - 1 {
            out[i] = y[i] - y[i + 1];
        }
        out[n - 1] = y[n - 1] - y[0];
    }
    fn name(&self) -> String {
        format!("grad1d({})", self.n)
    }
}

pub fn grad1d(n: usize) -> Result<LinOp> {
    if n < 2 {
        return Err(Error::Shape(format!("grad1d needs n >= 2, got {n}")));
    }
    Ok(LinOp::new(Grad1d { n }).with_norm_bound(2.0))
}

/// Periodic forward differences on an `n x m` image, producing two channels:
/// channel 0 differences along rows (`x[i+1, j] - x[i, j]`), channel 1 along
/// columns (`x[i, j+1] - x[i, j]`).
pub struct Grad2d {
    n: usize,
    m: usize,
}

impl LinearMap for Grad2d {
    fn domain(&self) -> Shape {
        Shape::grid(self.n, self.m)
    }
    fn codomain(&self) -> Shape {
        Shape::grid(self.n, self.m).with_channels(2)
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let (c0, c1) = out.split_at_mut(n * m);
        for i in 0..n {
            let down = (i + 1) % n;
            for j in 0..m {
                let right = (j + 1) % m;
                c0[i * m + j] = x[down * m + j] - x[i * m + j];
                c1[i * m + j] = x[i * m + right] - x[i * m + j];
            }
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        let (n, m) = (self.n, self.m);
        let (c0, c1) = y.split_at(n * m);
        for i in 0..n {
            let up = (i + n - 1) % n;
            for j in 0..m {
                let left = (j + m - 1) % m;
                out[i * m + j] = c0[up * m + j] - c0[i * m + j] + c1[i * m + left] - c1[i * m + j];
            }
        }
    }
    fn name(&self) -> String {
        format!("grad2d({}x{})", self.n, self.m)
    }
}

pub fn grad2d(n: usize, m: usize) -> Result<LinOp> {
    if n < 2 || m < 2 {
        return Err(Error::Shape(format!("grad2d needs n, m >= 2, got {n}x{m}")));
    }
    Ok(LinOp::new(Grad2d { n, m }).with_norm_bound(8f64.sqrt()))
}
