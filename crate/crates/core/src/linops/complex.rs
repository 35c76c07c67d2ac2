//! Maps that cross between real and complex spaces or act on complex grids
//! entrywise: `Re`, unit-modulus phase multiplication, and sampling masks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use num_complex::Complex64;

use super::{Field, LinOp, LinearMap, Shape};
use crate::{Error, Result};

/// `Re: C^{n x m} -> R^{n x m}`; its adjoint embeds with zero imaginary part.
pub struct RealPart {
    real: Shape,
}

impl LinearMap for RealPart {
    fn domain(&self) -> Shape {
        Shape {
            field: Field::Complex,
            ..self.real
        }
    }
    fn codomain(&self) -> Shape {
        self.real
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = x[2 * i];
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        for (i, yi) in y.iter().enumerate() {
            out[2 * i] = *yi;
            out[2 * i + 1] = 0.0;
        }
    }
    fn name(&self) -> String {
        "Re".into()
    }
}

pub fn real_part(rows: usize, cols: usize) -> LinOp {
    LinOp::new(RealPart {
        real: Shape::grid(rows, cols),
    })
    .with_norm_bound(1.0)
}

/// Entrywise multiplication by unit-modulus complex numbers.
pub struct Phase {
    shape: Shape,
    phase: Vec<Complex64>,
}

impl Phase {
    pub fn values(&self) -> &[Complex64] {
        &self.phase
    }

    fn mul(&self, x: &[f64], out: &mut [f64], conj: bool) {
        for (i, p) in self.phase.iter().enumerate() {
            let p = if conj { p.conj() } else { *p };
            let v = Complex64::new(x[2 * i], x[2 * i + 1]) * p;
            out[2 * i] = v.re;
            out[2 * i + 1] = v.im;
        }
    }
}

impl LinearMap for Phase {
    fn domain(&self) -> Shape {
        self.shape
    }
    fn codomain(&self) -> Shape {
        self.shape
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        self.mul(x, out, false)
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        self.mul(y, out, true)
    }
    fn name(&self) -> String {
        "phase".into()
    }
}

/// Diagonal phase operator; every entry must have modulus one (to 1e-12).
pub fn phase(shape: Shape, values: Vec<Complex64>) -> Result<LinOp> {
    if !shape.is_complex() {
        return Err(Error::Shape(format!("phase operator needs a complex space, got {shape}")));
    }
    if values.len() != shape.entries() {
        return Err(Error::dim("phase values", shape.entries(), values.len()));
    }
    if let Some(i) = values
        .iter()
        .position(|p| (p.norm() - 1.0).abs() > 1e-12)
    {
        return Err(Error::Parameter(format!(
            "phase entry {i} has modulus {}, expected 1",
            values[i].norm()
        )));
    }
    Ok(LinOp::new(Phase {
        shape,
        phase: values,
    })
    .with_norm_bound(1.0))
}

/// Picks the entries of a complex grid listed in `indices` (the mask `D`);
/// the adjoint is zero filling.
pub struct Selection {
    grid: Shape,
    indices: Vec<usize>,
}

impl Selection {
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }
}

impl LinearMap for Selection {
    fn domain(&self) -> Shape {
        self.grid
    }
    fn codomain(&self) -> Shape {
        Shape::complex_vector(self.indices.len())
    }
    fn forward(&self, x: &[f64], out: &mut [f64]) {
        for (k, &i) in self.indices.iter().enumerate() {
            out[2 * k] = x[2 * i];
            out[2 * k + 1] = x[2 * i + 1];
        }
    }
    fn adjoint(&self, y: &[f64], out: &mut [f64]) {
        out.fill(0.0);
        for (k, &i) in self.indices.iter().enumerate() {
            out[2 * i] = y[2 * k];
            out[2 * i + 1] = y[2 * k + 1];
        }
    }
    fn name(&self) -> String {
        format!("select {} of {}", self.indices.len(), self.grid.entries())
    }
}

/// Selection of the grid entries where `mask` is true, in row-major order.
pub fn selection(rows: usize, cols: usize, mask: &[bool]) -> Result<LinOp> {
    if mask.len() != rows * cols {
        return Err(Error::dim("selection mask", rows * cols, mask.len()));
    }
    let indices = mask
        .iter()
        .enumerate()
        .filter_map(|(i, m)| m.then_some(i))
        .collect();
    Ok(LinOp::new(Selection {
        grid: Shape::complex_grid(rows, cols),
        indices,
    })
    .with_norm_bound(1.0))
}

/// Zero filling `D*: C^{count} -> C^{rows x cols}`.
pub fn zero_fill(rows: usize, cols: usize, mask: &[bool]) -> Result<LinOp> {
    Ok(selection(rows, cols, mask)?.adjoint_op())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{adjoint_mismatch, compose};
    use alloc::vec;

    #[test]
    fn real_part_adjoint_embeds() {
        let re = real_part(2, 2);
        let y = re.adjoint_apply(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(y, vec![1.0, 0.0, 2.0, 0.0, 3.0, 0.0, 4.0, 0.0]);
        let re_re_star = compose(&[re.clone(), re.adjoint_op()]).unwrap();
        let v = [0.5, -1.5, 2.0, 7.0];
        assert_eq!(re_re_star.apply(&v).unwrap(), v.to_vec());
        assert!(adjoint_mismatch(&re, 20, 3).unwrap() < 1e-14);
    }

    #[test]
    fn phase_is_unitary() {
        let vals: Vec<Complex64> = (0..4).map(|k| Complex64::from_polar(1.0, 0.7 * k as f64)).collect();
        let p = phase(Shape::complex_grid(2, 2), vals).unwrap();
        let x = [1.0, 2.0, -1.0, 0.5, 3.0, 0.0, 0.1, -0.2];
        let y = p.apply(&x).unwrap();
        assert!((crate::vec::norm(&y) - crate::vec::norm(&x)).abs() < 1e-12);
        let back = p.adjoint_apply(&y).unwrap();
        assert!(crate::vec::dist(&back, &x) < 1e-14);
        assert!(phase(Shape::complex_vector(1), vec![Complex64::new(2.0, 0.0)]).is_err());
    }

    #[test]
    fn selection_and_zero_fill() {
        let mask = [true, false, false, true];
        let d = selection(2, 2, &mask).unwrap();
        assert_eq!(d.codomain(), Shape::complex_vector(2));
        let sel = d.apply(&[1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5]).unwrap();
        assert_eq!(sel, vec![1.0, 1.5, 4.0, 4.5]);
        let filled = zero_fill(2, 2, &mask).unwrap().apply(&sel).unwrap();
        assert_eq!(filled, vec![1.0, 1.5, 0.0, 0.0, 0.0, 0.0, 4.0, 4.5]);
        assert!(adjoint_mismatch(&d, 20, 4).unwrap() < 1e-14);
    }
}
