//! Unitary two-dimensional DFT.
//!
//! Power-of-two lengths use an iterative radix-2 FFT; other lengths fall back
//! to a direct transform with a precomputed twiddle table.

#[allow(unused_imports)] // inherent float methods win whenever std is linked
use num_traits::Float;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use super::{LinOp, LinearMap, Shape};
use crate::{Error, Result};

/// Unnormalized 1D DFT plan, `X_k = sum_j x_j exp(-2 pi i jk / n)`.
#[derive(Clone, Debug)]
pub struct Fft1d {
    n: usize,
    // exp(-2 pi i k / n), k = 0..n
    twiddles: Vec<Complex64>,
}

impl Fft1d {
    pub fn new(n: usize) -> Self {
        let twiddles = (0..n)
            .map(|k| Complex64::from_polar(1.0, -2.0 * PI * k as f64 / n as f64))
            .collect();
        Fft1d { n, twiddles }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        debug_assert_eq!(buf.len(), self.n);
        if self.n <= 1 {
            return;
        }
        if self.n.is_power_of_two() {
            self.radix2(buf);
        } else {
            self.direct(buf, scratch);
        }
    }

    pub fn inverse(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        buf.iter_mut().for_each(|v| *v = v.conj());
        self.forward(buf, scratch);
        buf.iter_mut().for_each(|v| *v = v.conj());
    }

    fn radix2(&self, buf: &mut [Complex64]) {
        let n = self.n;
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if j > i {
                buf.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = buf[start + k];
                    let b = buf[start + k + half] * w;
                    buf[start + k] = a + b;
                    buf[start + k + half] = a - b;
                }
            }
            len *= 2;
        }
    }

    fn direct(&self, buf: &mut [Complex64], scratch: &mut Vec<Complex64>) {
        let n = self.n;
        scratch.clear();
        scratch.extend_from_slice(buf);
        for (k, out) in buf.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, x) in scratch.iter().enumerate() {
                acc += x * self.twiddles[(j * k) % n];
            }
            *out = acc;
        }
    }
}

/// Unitary 2D DFT on `C^{n x m}` (or its inverse when `inverse` is set).
pub struct Dft2 {
    n: usize,
    m: usize,
    row_plan: Fft1d,
    col_plan: Fft1d,
    inverse: bool,
}

impl Dft2 {
    fn transform(&self, x: &[f64], out: &mut [f64], inverse: bool) {
        let (n, m) = (self.n, self.m);
        let mut grid: Vec<Complex64> = x
            .chunks_exact(2)
            .map(|c| Complex64::new(c[0], c[1]))
            .collect();
        let mut scratch = Vec::new();
        for row in grid.chunks_exact_mut(m) {
            if inverse {
                self.row_plan.inverse(row, &mut scratch);
            } else {
                self.row_plan.forward(row, &mut scratch);
            }
        }
        let mut col = alloc::vec![Complex64::new(0.0, 0.0); n];
        for j in 0..m {
            for i in 0..n {
                col[i] = grid[i * m + j];
            }
            if inverse {
                self.col_plan.inverse(&mut col, &mut scratch);
            } else {
                self.col_plan.forward(&mut col, &mut scratch);
            }
            for i in 0..n {
                grid[i * m + j] = col[i];
            }
        }
        let s = 1.0 / ((n * m) as f64).sqrt();
        for (k, v) in grid.iter().enumerate() {
            out[2 * k] = v.re * s;
            out[2 * k + 1] = v.im * s;
        }
    }
}

impl LinearMap for Dft2 {
    fn domain(&self) -> Shape {
        Shape::complex_grid(self.n, self.m)
    }
    fn codomain(&self) -> Shape {
        Shape::complex_grid(self.n, self.m)
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.transform(x, out, self.inverse)
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.transform(y, out, !self.inverse)
    }
    fn name(&self) -> String {
        let tag = if self.inverse { "idft2" } else { "dft2" };
        format!("{tag}({}x{})", self.n, self.m)
    }
}

fn build(n: usize, m: usize, inverse: bool) -> Result<LinOp> {
    if n == 0 || m == 0 {
        return Err(Error::Shape(format!("dft2 needs n, m >= 1, got {n}x{m}")));
    }
    Ok(LinOp::new(Dft2 {
        n,
        m,
        row_plan: Fft1d::new(m),
        col_plan: Fft1d::new(n),
        inverse,
    })
    .with_norm_bound(1.0))
}

/// Unitary forward DFT `F` (scaled by `1/sqrt(nm)`); its adjoint is `F^{-1}`.
pub fn dft2_unitary(n: usize, m: usize) -> Result<LinOp> {
    build(n, m, false)
}

/// Unitary inverse DFT `F^{-1}`.
pub fn idft2_unitary(n: usize, m: usize) -> Result<LinOp> {
    build(n, m, true)
}
