//! Orthogonal periodic 2D wavelet transform with the 8-tap Daubechies filter
//! (four vanishing moments), Mallat layout.
//!
//! After `L` levels the coarse approximation occupies the top-left
//! `n/2^L x m/2^L` block; everything else holds detail coefficients.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use super::{LinOp, LinearMap, Shape};
use crate::{Error, Result};

/// Reconstruction lowpass `h_0..h_7`; the highpass is `g_k = (-1)^k h_{7-k}`.
pub const DB4_LOWPASS: [f64; 8] = [
    0.230_377_813_308_855_23,
    0.714_846_570_552_541_5,
    0.630_880_767_929_590_4,
    -0.027_983_769_416_983_85,
    -0.187_034_811_718_881_14,
    0.030_841_381_835_986_965,
    0.032_883_011_666_982_945,
    -0.010_597_401_784_997_278,
];

fn highpass() -> [f64; 8] {
    let mut g = [0.0; 8];
    for (k, gk) in g.iter_mut().enumerate() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        *gk = sign * DB4_LOWPASS[7 - k];
    }
    g
}

/// One analysis step on a periodic signal of even length:
/// `a_i = sum_k h_k x_{2i+k}`, `d_i = sum_k g_k x_{2i+k}`, output `[a | d]`.
fn analyze(x: &[f64], out: &mut [f64], g: &[f64; 8]) {
    let len = x.len();
    let half = len / 2;
    for i in 0..half {
        let mut a = 0.0;
        let mut d = 0.0;
        for k in 0..8 {
            let v = x[(2 * i + k) % len];
            a += DB4_LOWPASS[k] * v;
            d += g[k] * v;
        }
        out[i] = a;
        out[half + i] = d;
    }
}

/// Exact transpose of [`analyze`].
fn synthesize(c: &[f64], out: &mut [f64], g: &[f64; 8]) {
    let len = c.len();
    let half = len / 2;
    out.fill(0.0);
    for i in 0..half {
        let (a, d) = (c[i], c[half + i]);
        for k in 0..8 {
            out[(2 * i + k) % len] += DB4_LOWPASS[k] * a + g[k] * d;
        }
    }
}

pub struct Dwt2 {
    n: usize,
    m: usize,
    levels: usize,
    g: [f64; 8],
}

impl Dwt2 {
    pub fn levels(&self) -> usize {
        self.levels
    }
}

impl LinearMap for Dwt2 {
    fn domain(&self) -> Shape {
        Shape::grid(self.n, self.m)
    }
    fn codomain(&self) -> Shape {
        Shape::grid(self.n, self.m)
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        let m = self.m;
        out.copy_from_slice(x);
        let mut buf = Vec::new();
        let mut tmp = Vec::new();
        let (mut rows, mut cols) = (self.n, self.m);
        for _ in 0..self.levels {
            buf.resize(cols, 0.0);
            tmp.resize(cols, 0.0);
            for i in 0..rows {
                buf.copy_from_slice(&out[i * m..i * m + cols]);
                analyze(&buf, &mut tmp, &self.g);
                out[i * m..i * m + cols].copy_from_slice(&tmp);
            }
            buf.resize(rows, 0.0);
            tmp.resize(rows, 0.0);
            for j in 0..cols {
                for i in 0..rows {
                    buf[i] = out[i * m + j];
                }
                analyze(&buf, &mut tmp, &self.g);
                for i in 0..rows {
                    out[i * m + j] = tmp[i];
                }
            }
            rows /= 2;
            cols /= 2;
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        let m = self.m;
        out.copy_from_slice(y);
        let mut buf = Vec::new();
        let mut tmp = Vec::new();
        for level in (0..self.levels).rev() {
            let rows = self.n >> level;
            let cols = self.m >> level;
            buf.resize(rows, 0.0);
            tmp.resize(rows, 0.0);
            for j in 0..cols {
                for i in 0..rows {
                    buf[i] = out[i * m + j];
                }
                synthesize(&buf, &mut tmp, &self.g);
                for i in 0..rows {
                    out[i * m + j] = tmp[i];
                }
            }
            buf.resize(cols, 0.0);
            tmp.resize(cols, 0.0);
            for i in 0..rows {
                buf.copy_from_slice(&out[i * m..i * m + cols]);
                synthesize(&buf, &mut tmp, &self.g);
                out[i * m..i * m + cols].copy_from_slice(&tmp);
            }
        }
    }
    fn name(&self) -> String {
        format!("dwt_db4({}x{}, {} levels)", self.n, self.m, self.levels)
    }
}

/// `log2(min(n, m)) - 2`, clamped to at least one level.
pub fn default_levels(n: usize, m: usize) -> usize {
    let min = n.min(m).max(1);
    let log2 = (usize::BITS - 1 - min.leading_zeros()) as usize;
    log2.saturating_sub(2).max(1)
}

pub fn dwt_ortho(n: usize, m: usize, levels: usize) -> Result<LinOp> {
    if levels == 0 {
        return Err(Error::Parameter("wavelet transform needs at least one level".into()));
    }
    let block = 1usize << levels;
    if n == 0 || m == 0 || !n.is_multiple_of(block) || !m.is_multiple_of(block) {
        return Err(Error::Shape(format!(
            "{n}x{m} grid is not divisible by 2^{levels} = {block}"
        )));
    }
    Ok(LinOp::new(Dwt2 {
        n,
        m,
        levels,
        g: highpass(),
    })
    .with_norm_bound(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::adjoint_mismatch;
    use alloc::vec;

    #[test]
    fn filter_identities() {
        let s: f64 = DB4_LOWPASS.iter().sum();
        assert!((s - core::f64::consts::SQRT_2).abs() < 1e-12);
        let e: f64 = DB4_LOWPASS.iter().map(|h| h * h).sum();
        assert!((e - 1.0).abs() < 1e-12);
        // even-shift orthogonality
        for shift in [2usize, 4, 6] {
            let c: f64 = (0..8 - shift).map(|k| DB4_LOWPASS[k] * DB4_LOWPASS[k + shift]).sum();
            assert!(c.abs() < 1e-12, "shift {shift}: {c}");
        }
        assert!(highpass().iter().sum::<f64>().abs() < 1e-12);
    }

    #[test]
    fn orthogonal_on_random_image() {
        let mut rng = crate::rng::seeded(31);
        let w = dwt_ortho(16, 16, default_levels(16, 16)).unwrap();
        let x = crate::rng::normal_vec(&mut rng, 256);
        let y = w.apply(&x).unwrap();
        assert!((crate::vec::norm(&y) - crate::vec::norm(&x)).abs() < 1e-10);
        let back = w.adjoint_apply(&y).unwrap();
        assert!(crate::vec::dist(&back, &x) < 1e-10);
        assert!(adjoint_mismatch(&w, 20, 3).unwrap() < 1e-12);
    }

    #[test]
    fn deep_levels_stay_orthogonal() {
        // coarse blocks shorter than the filter fold the taps periodically
        let mut rng = crate::rng::seeded(32);
        let w = dwt_ortho(8, 16, 3).unwrap();
        let x = crate::rng::normal_vec(&mut rng, 128);
        let back = w.adjoint_apply(&w.apply(&x).unwrap()).unwrap();
        assert!(crate::vec::dist(&back, &x) < 1e-10);
    }

    /// Direct periodic filter-bank convolution of an image along both axes.
    fn one_level_oracle(n: usize, m: usize, x: &[f64]) -> Vec<f64> {
        let g = highpass();
        let filt = |band: usize, k: usize| if band == 0 { DB4_LOWPASS[k] } else { g[k] };
        let mut out = vec![0.0; n * m];
        for bi in 0..2 {
            for bj in 0..2 {
                for i in 0..n / 2 {
                    for j in 0..m / 2 {
                        let mut acc = 0.0;
                        for k in 0..8 {
                            for l in 0..8 {
                                acc += filt(bi, k) * filt(bj, l) * x[((2 * i + k) % n) * m + (2 * j + l) % m];
                            }
                        }
                        out[(bi * n / 2 + i) * m + bj * m / 2 + j] = acc;
                    }
                }
            }
        }
        out
    }

    #[test]
    fn single_level_matches_filter_bank_and_kills_constants() {
        let mut rng = crate::rng::seeded(33);
        let x = crate::rng::normal_vec(&mut rng, 64);
        let w = dwt_ortho(8, 8, 1).unwrap();
        assert!(crate::vec::dist(&w.apply(&x).unwrap(), &one_level_oracle(8, 8, &x)) < 1e-12);

        let c = w.apply(&[3.0; 64]).unwrap();
        for i in 0..8 {
            for j in 0..8 {
                if i >= 4 || j >= 4 {
                    assert!(c[i * 8 + j].abs() < 1e-12);
                } else {
                    assert!((c[i * 8 + j] - 6.0).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn level_rules() {
        assert_eq!(default_levels(32, 32), 3);
        assert_eq!(default_levels(8, 8), 1);
        assert_eq!(default_levels(4, 64), 1);
        assert!(dwt_ortho(12, 16, 3).is_err());
        assert!(dwt_ortho(16, 16, 0).is_err());
    }
}
